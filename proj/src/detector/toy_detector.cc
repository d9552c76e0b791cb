/*
 * Copyright 2026 The fedsten Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedsten/detector/toy_detector.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsten/common/error.h"
#include "fedsten/common/rng.h"

namespace fedsten::detector {

namespace {

constexpr std::size_t kOutputs = 5;
// Fixed entry positions of the first conv layer and the norm layer.
constexpr std::size_t kL0W = 0, kL0B = 1, kGamma = 2, kBeta = 3, kRunMean = 4, kRunVar = 5;

// Entry indices of one dense or conv layer.
struct LayerIndex {
  std::size_t w = 0, b = 0;
};

struct Layout {
  // backbone.l<i> for i >= 1.
  std::vector<LayerIndex> convs;
  // head.l<j> followed by head.out.
  std::vector<LayerIndex> dense;
};

Layout layout_of(const ToyDetectorConfig& c) {
  Layout layout;
  std::size_t index = 6;
  for (std::size_t i = 1; i < c.backbone_widths.size(); ++i, index += 2) {
    layout.convs.push_back({index, index + 1});
  }
  for (std::size_t j = 0; j <= c.head_widths.size(); ++j, index += 2) {
    layout.dense.push_back({index, index + 1});
  }
  return layout;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double smooth_l1(double r) {
  const double a = std::abs(r);
  return a < 1.0 ? 0.5 * r * r : a - 0.5;
}

double smooth_l1_grad(double r) { return std::clamp(r, -1.0, 1.0); }

// Row-major [rows, cols] matrix.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double* row(std::size_t r) { return v.data() + r * cols; }
  const double* row(std::size_t r) const { return v.data() + r * cols; }
};

// [n, c, h, w] feature map.
struct FeatureMap {
  std::size_t n = 0, c = 0, h = 0, w = 0;
  std::vector<double> v;

  FeatureMap() = default;
  FeatureMap(std::size_t n_, std::size_t c_, std::size_t h_, std::size_t w_)
      : n(n_), c(c_), h(h_), w(w_), v(n_ * c_ * h_ * w_, 0.0) {}
  double* plane(std::size_t i, std::size_t ch) { return v.data() + (i * c + ch) * h * w; }
  const double* plane(std::size_t i, std::size_t ch) const {
    return v.data() + (i * c + ch) * h * w;
  }
};

FeatureMap load_images(const ToyDetectorConfig& c, std::span<const Tensor> images) {
  const std::size_t s = c.image_size;
  FeatureMap x(images.size(), 1, s, s);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    if (img.dims().size() != 3 || img.dims()[0] != 1 || img.dims()[1] != s ||
        img.dims()[2] != s) {
      throw InvalidArgumentError("image shape does not match detector config");
    }
    std::copy(img.data().begin(), img.data().end(), x.plane(i, 0));
  }
  return x;
}

// Patch matrix of one image for a 3x3 convolution with zero padding 1:
// col[p * c * 9 + k] for pixel p and tap k = (ci * 3 + ky) * 3 + kx.
void im2col(const FeatureMap& in, std::size_t i, std::vector<double>& col) {
  const long h = static_cast<long>(in.h), w = static_cast<long>(in.w);
  const std::size_t taps = in.c * 9;
  col.assign(in.h * in.w * taps, 0.0);
  for (std::size_t ci = 0; ci < in.c; ++ci) {
    const double* src = in.plane(i, ci);
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        double* dst = col.data() + (y * w + x) * taps + ci * 9;
        for (long ky = 0; ky < 3; ++ky) {
          const long sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (long kx = 0; kx < 3; ++kx) {
            const long sx = x + kx - 1;
            if (sx >= 0 && sx < w) dst[ky * 3 + kx] = src[sy * w + sx];
          }
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& col, FeatureMap& out, std::size_t i) {
  const long h = static_cast<long>(out.h), w = static_cast<long>(out.w);
  const std::size_t taps = out.c * 9;
  for (std::size_t ci = 0; ci < out.c; ++ci) {
    double* dst = out.plane(i, ci);
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        const double* src = col.data() + (y * w + x) * taps + ci * 9;
        for (long ky = 0; ky < 3; ++ky) {
          const long sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (long kx = 0; kx < 3; ++kx) {
            const long sx = x + kx - 1;
            if (sx >= 0 && sx < w) dst[sy * w + sx] += src[ky * 3 + kx];
          }
        }
      }
    }
  }
}

// 3x3 convolution with zero padding 1: out = conv(in, w) + b, w as
// [out_channels, in.c * 9].
FeatureMap conv3x3(const FeatureMap& in, const std::vector<double>& w,
                   const std::vector<double>& b, std::size_t out_channels) {
  FeatureMap out(in.n, out_channels, in.h, in.w);
  const std::size_t pixels = in.h * in.w, taps = in.c * 9;
  // Taps-major copy of w so the inner loop runs over output channels.
  std::vector<double> wt(taps * out_channels);
  for (std::size_t co = 0; co < out_channels; ++co) {
    for (std::size_t k = 0; k < taps; ++k) wt[k * out_channels + co] = w[co * taps + k];
  }
  std::vector<double> col, acc(out_channels);
  for (std::size_t i = 0; i < in.n; ++i) {
    im2col(in, i, col);
    for (std::size_t p = 0; p < pixels; ++p) {
      double* a = acc.data();
      std::copy(b.begin(), b.end(), a);
      const double* cr = col.data() + p * taps;
      for (std::size_t k = 0; k < taps; ++k) {
        const double c = cr[k];
        const double* wr = wt.data() + k * out_channels;
        for (std::size_t co = 0; co < out_channels; ++co) a[co] += c * wr[co];
      }
      for (std::size_t co = 0; co < out_channels; ++co) out.plane(i, co)[p] = acc[co];
    }
  }
  return out;
}

// Accumulates dW and db; writes din when requested.
void conv3x3_backward(const FeatureMap& in, const FeatureMap& dout, const std::vector<double>& w,
                      std::vector<double>& dw, std::vector<double>& db, FeatureMap* din) {
  const std::size_t pixels = in.h * in.w, taps = in.c * 9;
  if (din != nullptr) *din = FeatureMap(in.n, in.c, in.h, in.w);
  std::vector<double> col, dcol;
  for (std::size_t i = 0; i < in.n; ++i) {
    im2col(in, i, col);
    if (din != nullptr) dcol.assign(col.size(), 0.0);
    for (std::size_t co = 0; co < dout.c; ++co) {
      const double* g = dout.plane(i, co);
      const double* wr = w.data() + co * taps;
      double* dwr = dw.data() + co * taps;
      double gsum = 0.0;
      for (std::size_t p = 0; p < pixels; ++p) {
        const double gp = g[p];
        gsum += gp;
        const double* cr = col.data() + p * taps;
        for (std::size_t k = 0; k < taps; ++k) dwr[k] += gp * cr[k];
        if (din != nullptr) {
          double* dr = dcol.data() + p * taps;
          for (std::size_t k = 0; k < taps; ++k) dr[k] += gp * wr[k];
        }
      }
      db[co] += gsum;
    }
    if (din != nullptr) col2im_add(dcol, *din, i);
  }
}

FeatureMap avg_pool2(const FeatureMap& in) {
  FeatureMap out(in.n, in.c, in.h / 2, in.w / 2);
  for (std::size_t i = 0; i < in.n; ++i) {
    for (std::size_t ch = 0; ch < in.c; ++ch) {
      const double* src = in.plane(i, ch);
      double* dst = out.plane(i, ch);
      for (std::size_t y = 0; y < out.h; ++y) {
        for (std::size_t x = 0; x < out.w; ++x) {
          const double* a = src + 2 * y * in.w + 2 * x;
          dst[y * out.w + x] = 0.25 * (a[0] + a[1] + a[in.w] + a[in.w + 1]);
        }
      }
    }
  }
  return out;
}

FeatureMap avg_pool2_backward(const FeatureMap& dout, std::size_t h, std::size_t w) {
  FeatureMap din(dout.n, dout.c, h, w);
  for (std::size_t i = 0; i < dout.n; ++i) {
    for (std::size_t ch = 0; ch < dout.c; ++ch) {
      const double* g = dout.plane(i, ch);
      double* d = din.plane(i, ch);
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) d[y * w + x] = 0.25 * g[(y / 2) * dout.w + x / 2];
      }
    }
  }
  return din;
}

// Cell tiles of a feature map as rows [n * cells, c * tile * tile].
Matrix gather_cells(const FeatureMap& map, std::size_t grid) {
  const std::size_t tile = map.h / grid, cells = grid * grid;
  Matrix out(map.n * cells, map.c * tile * tile);
  for (std::size_t i = 0; i < map.n; ++i) {
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const std::size_t y0 = (cell / grid) * tile, x0 = (cell % grid) * tile;
      double* dst = out.row(i * cells + cell);
      for (std::size_t ch = 0; ch < map.c; ++ch) {
        const double* src = map.plane(i, ch);
        for (std::size_t y = 0; y < tile; ++y) {
          for (std::size_t x = 0; x < tile; ++x) {
            *dst++ = src[(y0 + y) * map.w + x0 + x];
          }
        }
      }
    }
  }
  return out;
}

FeatureMap scatter_cells(const Matrix& rows, std::size_t n, std::size_t c, std::size_t h,
                         std::size_t grid) {
  FeatureMap map(n, c, h, h);
  const std::size_t tile = h / grid, cells = grid * grid;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const std::size_t y0 = (cell / grid) * tile, x0 = (cell % grid) * tile;
      const double* src = rows.row(i * cells + cell);
      for (std::size_t ch = 0; ch < c; ++ch) {
        double* dst = map.plane(i, ch);
        for (std::size_t y = 0; y < tile; ++y) {
          for (std::size_t x = 0; x < tile; ++x) dst[(y0 + y) * h + x0 + x] = *src++;
        }
      }
    }
  }
  return map;
}

// out = in * W^T + b
void dense_forward(const Matrix& in, const std::vector<double>& w, const std::vector<double>& b,
                   Matrix& out) {
  for (std::size_t n = 0; n < in.rows; ++n) {
    const double* xi = in.row(n);
    double* yo = out.row(n);
    for (std::size_t o = 0; o < out.cols; ++o) {
      const double* wr = w.data() + o * in.cols;
      double s = b[o];
      for (std::size_t i = 0; i < in.cols; ++i) s += wr[i] * xi[i];
      yo[o] = s;
    }
  }
}

// dW += dout^T * in, db += colsum(dout), din = dout * W.
void dense_backward(const Matrix& in, const Matrix& dout, const std::vector<double>& w,
                    std::vector<double>& dw, std::vector<double>& db, Matrix& din) {
  din = Matrix(in.rows, in.cols);
  for (std::size_t n = 0; n < in.rows; ++n) {
    const double* xi = in.row(n);
    const double* g = dout.row(n);
    double* di = din.row(n);
    for (std::size_t o = 0; o < dout.cols; ++o) {
      const double go = g[o];
      db[o] += go;
      double* dwr = dw.data() + o * in.cols;
      const double* wr = w.data() + o * in.cols;
      for (std::size_t i = 0; i < in.cols; ++i) {
        dwr[i] += go * xi[i];
        di[i] += go * wr[i];
      }
    }
  }
}

void tanh_inplace(std::vector<double>& v) {
  for (auto& x : v) x = std::tanh(x);
}

// d/dz of tanh(z) expressed through the output.
void tanh_backward(std::vector<double>& grad, const std::vector<double>& out) {
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - out[i] * out[i];
}

struct Activations {
  FeatureMap input;
  FeatureMap normalized;  // x-hat of the first conv
  std::vector<double> inv_std;
  // maps[0] is tanh(pool(norm(conv0))); maps[i] the output of backbone.l<i>.
  std::vector<FeatureMap> maps;
  // dense[0] is the gathered cell features; dense[j + 1] the output of head
  // layer j. The last entry holds the raw 5-wide outputs.
  std::vector<Matrix> dense;
};

void run_forward(const ToyDetectorConfig& c, const Buffers& p, std::span<const Tensor> images,
                 NormMode mode, Activations& act, NormStats* stats) {
  const std::size_t ch0 = c.backbone_widths[0];
  act.input = load_images(c, images);
  const FeatureMap pre = conv3x3(act.input, p[kL0W], p[kL0B], ch0);
  const std::size_t per_channel = pre.n * pre.h * pre.w;
  const std::size_t plane = pre.h * pre.w;

  std::vector<double> mean(ch0, 0.0), var(ch0, 0.0);
  if (mode == NormMode::kTrain) {
    for (std::size_t i = 0; i < pre.n; ++i) {
      for (std::size_t ch = 0; ch < ch0; ++ch) {
        const double* a = pre.plane(i, ch);
        for (std::size_t q = 0; q < plane; ++q) mean[ch] += a[q];
      }
    }
    for (auto& m : mean) m /= static_cast<double>(per_channel);
    for (std::size_t i = 0; i < pre.n; ++i) {
      for (std::size_t ch = 0; ch < ch0; ++ch) {
        const double* a = pre.plane(i, ch);
        for (std::size_t q = 0; q < plane; ++q) {
          const double e = a[q] - mean[ch];
          var[ch] += e * e;
        }
      }
    }
    for (auto& v : var) v /= static_cast<double>(per_channel);
    if (stats != nullptr) {
      stats->mean = mean;
      stats->variance = var;
      if (per_channel > 1) {
        const double scale = static_cast<double>(per_channel) / (per_channel - 1.0);
        for (auto& v : stats->variance) v *= scale;
      }
    }
  } else {
    mean = p[kRunMean];
    var = p[kRunVar];
  }
  act.inv_std.resize(ch0);
  for (std::size_t ch = 0; ch < ch0; ++ch) act.inv_std[ch] = 1.0 / std::sqrt(var[ch] + c.norm_eps);

  act.normalized = FeatureMap(pre.n, ch0, pre.h, pre.w);
  FeatureMap affine(pre.n, ch0, pre.h, pre.w);
  for (std::size_t i = 0; i < pre.n; ++i) {
    for (std::size_t ch = 0; ch < ch0; ++ch) {
      const double* a = pre.plane(i, ch);
      double* xh = act.normalized.plane(i, ch);
      double* y = affine.plane(i, ch);
      const double g = p[kGamma][ch], be = p[kBeta][ch];
      for (std::size_t q = 0; q < plane; ++q) {
        xh[q] = (a[q] - mean[ch]) * act.inv_std[ch];
        y[q] = g * xh[q] + be;
      }
    }
  }

  const Layout layout = layout_of(c);
  act.maps.clear();
  act.maps.push_back(avg_pool2(affine));
  tanh_inplace(act.maps.back().v);
  for (std::size_t i = 0; i < layout.convs.size(); ++i) {
    FeatureMap out = conv3x3(act.maps.back(), p[layout.convs[i].w], p[layout.convs[i].b],
                             c.backbone_widths[i + 1]);
    tanh_inplace(out.v);
    act.maps.push_back(std::move(out));
  }

  act.dense.clear();
  act.dense.push_back(gather_cells(act.maps.back(), c.grid));
  for (std::size_t j = 0; j < layout.dense.size(); ++j) {
    const auto& l = layout.dense[j];
    Matrix out(act.dense.back().rows, p[l.b].size());
    dense_forward(act.dense.back(), p[l.w], p[l.b], out);
    if (j + 1 < layout.dense.size()) tanh_inplace(out.v);
    act.dense.push_back(std::move(out));
  }
}

std::vector<ImageOutput> to_outputs(const ToyDetectorConfig& c, const Matrix& raw,
                                    std::size_t n_images) {
  std::vector<ImageOutput> outputs(n_images);
  const std::size_t cells = c.cell_count();
  for (std::size_t i = 0; i < n_images; ++i) {
    outputs[i].cells.resize(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const double* r = raw.row(i * cells + cell);
      auto& o = outputs[i].cells[cell];
      o.logit = r[0];
      for (int k = 0; k < 4; ++k) o.offsets[k] = r[1 + k];
    }
  }
  return outputs;
}

}  // namespace

std::uint32_t ToyDetectorConfig::cell_features() const {
  const std::uint32_t tile = cell_size() / 2;
  return backbone_widths.back() * tile * tile;
}

void ToyDetectorConfig::validate() const {
  if (grid == 0 || image_size % grid != 0 || image_size / grid < 2 || cell_size() % 2 != 0) {
    throw InvalidArgumentError("image_size must be a multiple of grid with even cells >= 2 px");
  }
  if (backbone_widths.empty()) throw InvalidArgumentError("backbone needs at least one layer");
  for (auto w : backbone_widths) {
    if (w == 0) throw InvalidArgumentError("backbone widths must be positive");
  }
  for (auto w : head_widths) {
    if (w == 0) throw InvalidArgumentError("head widths must be positive");
  }
  if (!(norm_momentum > 0.0 && norm_momentum <= 1.0)) {
    throw InvalidArgumentError("norm_momentum must lie in (0, 1]");
  }
  if (!(norm_eps > 0.0)) throw InvalidArgumentError("norm_eps must be positive");
  if (!(loss_reg_weight > 0.0) || !std::isfinite(loss_reg_weight)) {
    throw InvalidArgumentError("loss_reg_weight must be positive");
  }
}

double CellOutput::probability() const { return 1.0 / (1.0 + std::exp(-logit)); }

ImageTargets encode_targets(std::span<const Box> boxes, const ToyDetectorConfig& c) {
  ImageTargets targets(c.cell_count());
  const double cs = c.cell_size();
  for (const auto& b : boxes) {
    const double cx = b.center_x(), cy = b.center_y();
    const auto gx = std::clamp<long>(static_cast<long>(std::floor(cx / cs)), 0, c.grid - 1);
    const auto gy = std::clamp<long>(static_cast<long>(std::floor(cy / cs)), 0, c.grid - 1);
    auto& t = targets[gy * c.grid + gx];
    if (t.present) continue;
    t.present = true;
    t.offsets = {(cx - (gx + 0.5) * cs) / cs, (cy - (gy + 0.5) * cs) / cs,
                 std::log(static_cast<double>(b.width()) / cs),
                 std::log(static_cast<double>(b.height()) / cs)};
  }
  return targets;
}

Box decode_box(std::size_t cell, const std::array<double, 4>& t, const ToyDetectorConfig& c) {
  const double cs = c.cell_size(), size = c.image_size;
  const double gx = static_cast<double>(cell % c.grid), gy = static_cast<double>(cell / c.grid);
  const double cx = std::clamp((gx + 0.5) * cs + t[0] * cs, 0.0, size);
  const double cy = std::clamp((gy + 0.5) * cs + t[1] * cs, 0.0, size);
  const double w = cs * std::exp(std::clamp(t[2], -4.0, 4.0));
  const double h = cs * std::exp(std::clamp(t[3], -4.0, 4.0));
  Box b{static_cast<float>(std::max(0.0, cx - 0.5 * w)), static_cast<float>(std::max(0.0, cy - 0.5 * h)),
        static_cast<float>(std::min(size, cx + 0.5 * w)), static_cast<float>(std::min(size, cy + 0.5 * h))};
  return b;
}

double detection_loss(std::span<const ImageOutput> outputs, std::span<const ImageTargets> targets,
                      double reg_weight) {
  if (outputs.size() != targets.size()) {
    throw InvalidArgumentError("detection_loss: outputs and targets differ in length");
  }
  if (outputs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& cells = outputs[i].cells;
    if (cells.size() != targets[i].size()) {
      throw InvalidArgumentError("detection_loss: cell counts differ");
    }
    double ce = 0.0, reg = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& t = targets[i][c];
      if (t.present) {
        ce += softplus(-cells[c].logit);
        for (int k = 0; k < 4; ++k) reg += smooth_l1(cells[c].offsets[k] - t.offsets[k]);
      } else {
        ce += softplus(cells[c].logit);
      }
    }
    total += ce + reg_weight * reg;
  }
  return total / static_cast<double>(outputs.size());
}

Tensor flip_image(const Tensor& image) {
  const auto dims = image.dims();
  const std::size_t h = dims[dims.size() - 2], w = dims[dims.size() - 1];
  const std::size_t planes = image.size() / (h * w);
  std::vector<float> out(image.size());
  auto in = image.data();
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out[(p * h + y) * w + x] = in[(p * h + y) * w + (w - 1 - x)];
      }
    }
  }
  return Tensor(std::vector<std::uint64_t>(dims.begin(), dims.end()), std::move(out));
}

std::vector<Box> flip_boxes(std::span<const Box> boxes, std::uint32_t image_size) {
  const float s = static_cast<float>(image_size);
  std::vector<Box> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back({s - b.x_max, b.y_min, s - b.x_min, b.y_max});
  return out;
}

ImageOutput flip_output(const ImageOutput& output, const ToyDetectorConfig& c) {
  ImageOutput out;
  out.cells.resize(output.cells.size());
  for (std::size_t cell = 0; cell < output.cells.size(); ++cell) {
    const std::size_t gy = cell / c.grid, gx = cell % c.grid;
    auto o = output.cells[cell];
    o.offsets[0] = -o.offsets[0];
    out.cells[gy * c.grid + (c.grid - 1 - gx)] = o;
  }
  return out;
}

Buffers to_buffers(const NamedParameterSet& params) {
  Buffers out;
  out.reserve(params.size());
  for (const auto& e : params) out.emplace_back(e.tensor.data().begin(), e.tensor.data().end());
  return out;
}

NamedParameterSet init_parameters(const ToyDetectorConfig& c, std::uint64_t seed) {
  c.validate();
  Rng rng(seed);
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  auto uniform = [&](std::size_t n, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-bound, bound));
    return v;
  };
  NamedParameterSet p;
  const std::uint64_t c0 = c.backbone_widths[0];
  p.add("backbone.l0.w", Role::kTrainable, Tensor({c0, 1, 3, 3}, uniform(c0 * 9, 9)));
  p.add("backbone.l0.b", Role::kTrainable, Tensor::zeros({c0}));
  p.add("backbone.norm.w", Role::kTrainable, Tensor::filled({c0}, 1.0f));
  p.add("backbone.norm.b", Role::kTrainable, Tensor::zeros({c0}));
  p.add("backbone.norm.running_mean", Role::kStatistic, Tensor::zeros({c0}));
  p.add("backbone.norm.running_var", Role::kStatistic, Tensor::filled({c0}, 1.0f));

  for (std::size_t i = 1; i < c.backbone_widths.size(); ++i) {
    const std::uint64_t in = c.backbone_widths[i - 1], out = c.backbone_widths[i];
    const std::string name = "backbone.l" + std::to_string(i);
    p.add(name + ".w", Role::kTrainable, Tensor({out, in, 3, 3}, uniform(out * in * 9, in * 9)));
    p.add(name + ".b", Role::kTrainable, Tensor::zeros({out}));
  }
  std::uint64_t prev = c.cell_features();
  auto dense = [&](const std::string& name, std::uint64_t out) {
    p.add(name + ".w", Role::kTrainable, Tensor({out, prev}, uniform(out * prev, prev)));
    p.add(name + ".b", Role::kTrainable, Tensor::zeros({out}));
    prev = out;
  };
  for (std::size_t j = 0; j < c.head_widths.size(); ++j) {
    dense("head.l" + std::to_string(j), c.head_widths[j]);
  }
  dense("head.out", kOutputs);
  return p;
}

void check_schema(const ToyDetectorConfig& config, const NamedParameterSet& params) {
  require_same_schema(init_parameters(config, 0), params);
}

std::vector<ImageOutput> forward(const ToyDetectorConfig& config, const Buffers& params,
                                 std::span<const Tensor> images, NormMode mode,
                                 NormStats* batch_stats) {
  Activations act;
  run_forward(config, params, images, mode, act, batch_stats);
  return to_outputs(config, act.dense.back(), images.size());
}

double loss_and_gradients(const ToyDetectorConfig& c, const Buffers& p,
                          std::span<const Tensor> images, std::span<const ImageTargets> targets,
                          NormMode mode, Buffers* grads, NormStats* batch_stats) {
  if (images.size() != targets.size() || images.empty()) {
    throw InvalidArgumentError("loss_and_gradients: need one target per image");
  }
  Activations act;
  run_forward(c, p, images, mode, act, batch_stats);
  const auto outputs = to_outputs(c, act.dense.back(), images.size());
  const double loss = detection_loss(outputs, targets, c.loss_reg_weight);
  if (grads == nullptr) return loss;

  grads->resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) (*grads)[i].assign(p[i].size(), 0.0);
  Buffers& g = *grads;

  const std::size_t cells = c.cell_count();
  const std::size_t rows = act.dense.back().rows;
  const double inv_batch = 1.0 / static_cast<double>(images.size());
  const double lambda = c.loss_reg_weight;

  Matrix delta(rows, kOutputs);
  for (std::size_t n = 0; n < rows; ++n) {
    const auto& t = targets[n / cells][n % cells];
    const auto& o = outputs[n / cells].cells[n % cells];
    double* d = delta.row(n);
    d[0] = (o.probability() - (t.present ? 1.0 : 0.0)) * inv_batch;
    if (t.present) {
      for (int k = 0; k < 4; ++k) {
        d[1 + k] = lambda * smooth_l1_grad(o.offsets[k] - t.offsets[k]) * inv_batch;
      }
    }
  }

  const Layout layout = layout_of(c);
  for (std::size_t j = layout.dense.size(); j-- > 0;) {
    Matrix din;
    dense_backward(act.dense[j], delta, p[layout.dense[j].w], g[layout.dense[j].w],
                   g[layout.dense[j].b], din);
    // Every head input except the gathered features is a tanh output.
    if (j > 0) tanh_backward(din.v, act.dense[j].v);
    delta = std::move(din);
  }

  const FeatureMap& last = act.maps.back();
  FeatureMap dmap = scatter_cells(delta, last.n, last.c, last.h, c.grid);
  for (std::size_t i = layout.convs.size(); i-- > 0;) {
    tanh_backward(dmap.v, act.maps[i + 1].v);
    FeatureMap din;
    conv3x3_backward(act.maps[i], dmap, p[layout.convs[i].w], g[layout.convs[i].w],
                     g[layout.convs[i].b], &din);
    dmap = std::move(din);
  }

  tanh_backward(dmap.v, act.maps[0].v);
  FeatureMap dy = avg_pool2_backward(dmap, act.normalized.h, act.normalized.w);

  const std::size_t ch0 = c.backbone_widths[0];
  const std::size_t plane = act.normalized.h * act.normalized.w;
  const double count = static_cast<double>(act.normalized.n * plane);
  std::vector<double> sum_dxh(ch0, 0.0), sum_dxh_xh(ch0, 0.0);
  for (std::size_t i = 0; i < dy.n; ++i) {
    for (std::size_t ch = 0; ch < ch0; ++ch) {
      double* d = dy.plane(i, ch);
      const double* xh = act.normalized.plane(i, ch);
      const double gamma = p[kGamma][ch];
      double sg = 0.0, sb = 0.0, s1 = 0.0, s2 = 0.0;
      for (std::size_t q = 0; q < plane; ++q) {
        sg += d[q] * xh[q];
        sb += d[q];
        d[q] *= gamma;  // now d(loss)/d(x-hat)
        s1 += d[q];
        s2 += d[q] * xh[q];
      }
      g[kGamma][ch] += sg;
      g[kBeta][ch] += sb;
      sum_dxh[ch] += s1;
      sum_dxh_xh[ch] += s2;
    }
  }
  for (std::size_t i = 0; i < dy.n; ++i) {
    for (std::size_t ch = 0; ch < ch0; ++ch) {
      double* d = dy.plane(i, ch);
      const double* xh = act.normalized.plane(i, ch);
      const double is = act.inv_std[ch];
      if (mode == NormMode::kTrain) {
        const double m1 = sum_dxh[ch] / count, m2 = sum_dxh_xh[ch] / count;
        for (std::size_t q = 0; q < plane; ++q) d[q] = is * (d[q] - m1 - xh[q] * m2);
      } else {
        for (std::size_t q = 0; q < plane; ++q) d[q] *= is;
      }
    }
  }
  conv3x3_backward(act.input, dy, p[kL0W], g[kL0W], g[kL0B], nullptr);
  return loss;
}

void update_running_stats(const ToyDetectorConfig& c, NamedParameterSet& params,
                          const NormStats& stats) {
  const double m = c.norm_momentum;
  auto blend = [&](std::size_t index, const std::vector<double>& batch) {
    auto data = params.mutable_tensor(index).mutable_data();
    if (batch.size() != data.size()) throw InvalidArgumentError("norm stats width mismatch");
    for (std::size_t d = 0; d < data.size(); ++d) {
      data[d] = static_cast<float>((1.0 - m) * static_cast<double>(data[d]) + m * batch[d]);
    }
  };
  blend(kRunMean, stats.mean);
  blend(kRunVar, stats.variance);
}

ToyDetector::ToyDetector(ToyDetectorConfig config, std::uint64_t seed)
    : config_(std::move(config)), params_(init_parameters(config_, seed)) {}

ToyDetector::ToyDetector(ToyDetectorConfig config, NamedParameterSet params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  check_schema(config_, params_);
}

void ToyDetector::set_parameters(NamedParameterSet params) {
  require_same_schema(params_, params);
  params_ = std::move(params);
}

std::vector<ImageOutput> ToyDetector::forward(std::span<const Tensor> images, NormMode mode) {
  NormStats stats;
  auto out = detector::forward(config_, to_buffers(params_), images, mode, &stats);
  if (mode == NormMode::kTrain) update_running_stats(config_, params_, stats);
  return out;
}

ImageOutput ToyDetector::evaluate(const Tensor& image) const {
  auto out = detector::forward(config_, to_buffers(params_), std::span(&image, 1), NormMode::kEval);
  return std::move(out.front());
}

std::vector<Prediction> ToyDetector::predict(const Tensor& image,
                                             double confidence_threshold) const {
  const ImageOutput out = evaluate(image);
  std::vector<Prediction> preds;
  for (std::size_t cell = 0; cell < out.cells.size(); ++cell) {
    const double prob = out.cells[cell].probability();
    if (prob >= confidence_threshold) {
      preds.push_back({decode_box(cell, out.cells[cell].offsets, config_), static_cast<float>(prob)});
    }
  }
  std::stable_sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) {
    return a.confidence > b.confidence;
  });
  return preds;
}

}  // namespace fedsten::detector
