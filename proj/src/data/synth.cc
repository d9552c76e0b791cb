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

#include "fedsten/data/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <numeric>

#include "fedsten/common/error.h"
#include "fedsten/common/rng.h"

namespace fedsten::data {

void ClientProfile::validate() const {
  if (client_id.empty()) throw InvalidArgumentError("profile needs a client_id");
  if (n_patients < 2) throw InvalidArgumentError("profile needs at least two patients");
  if (min_images_per_patient < 1 || max_images_per_patient < min_images_per_patient) {
    throw InvalidArgumentError("invalid images-per-patient range");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgumentError("test_fraction must lie in (0, 1)");
  }
  if (grid == 0 || image_size % grid != 0 || image_size / grid < 4) {
    throw InvalidArgumentError("image_size must be a multiple of grid with cells >= 4 px");
  }
  if (min_boxes_per_image < 1 || max_boxes_per_image < min_boxes_per_image ||
      max_boxes_per_image > grid * grid) {
    throw InvalidArgumentError("invalid boxes-per-image range");
  }
  if (!std::isfinite(intensity_mean) || !std::isfinite(intensity_std) || intensity_std < 0.0) {
    throw InvalidArgumentError("invalid intensity statistics");
  }
}

ClientProfile default_client1_profile() {
  ClientProfile p;
  p.client_id = "client1";
  p.n_patients = 25;
  p.min_images_per_patient = 3;
  p.max_images_per_patient = 7;
  p.sequential = false;
  p.intensity_mean = 0.35;
  p.intensity_std = 0.10;
  p.min_boxes_per_image = 1;
  p.max_boxes_per_image = 4;
  p.test_fraction = 0.1;
  return p;
}

ClientProfile default_client2_profile() {
  ClientProfile p;
  p.client_id = "client2";
  p.n_patients = 80;
  p.min_images_per_patient = 9;
  p.max_images_per_patient = 9;
  p.sequential = true;
  p.intensity_mean = 0.55;
  p.intensity_std = 0.06;
  p.min_boxes_per_image = 1;
  p.max_boxes_per_image = 1;
  p.test_fraction = 0.1;
  return p;
}

namespace {

struct Vessel {
  // The centerline passes through (x0, y0).
  double x0 = 0, y0 = 0;
  double angle = 0;
  double amplitude = 0;
  double frequency = 0;
  double phase = 0;
  double sigma = 1.2;
  double brightness = 0.35;
};

struct Stenosis {
  double cx = 0, cy = 0;
  double rx = 2.5, ry = 2.5;
  double depth = 0.5;
};

struct Scene {
  std::vector<Stenosis> stenoses;
  std::vector<Vessel> vessels;
};

Vessel random_vessel(Rng& rng, double x0, double y0) {
  Vessel v;
  v.x0 = x0;
  v.y0 = y0;
  v.angle = rng.uniform(0.0, 3.14159265358979);
  v.amplitude = rng.uniform(0.5, 3.0);
  v.frequency = rng.uniform(0.08, 0.25);
  v.phase = rng.uniform(0.0, 6.2831853);
  v.sigma = rng.uniform(1.0, 1.4);
  v.brightness = rng.uniform(0.30, 0.40);
  return v;
}

Scene random_scene(const ClientProfile& p, Rng& rng) {
  const double cell = static_cast<double>(p.image_size) / p.grid;
  const auto n_boxes = static_cast<std::uint32_t>(
      rng.uniform_int(p.min_boxes_per_image, p.max_boxes_per_image));
  std::vector<std::uint32_t> cells(p.grid * p.grid);
  std::iota(cells.begin(), cells.end(), 0u);
  rng.shuffle(cells.begin(), cells.end());

  Scene scene;
  for (std::uint32_t i = 0; i < n_boxes; ++i) {
    const double gx = cells[i] % p.grid;
    const double gy = cells[i] / p.grid;
    Stenosis s;
    s.cx = gx * cell + rng.uniform(1.0, cell - 1.0);
    s.cy = gy * cell + rng.uniform(1.0, cell - 1.0);
    s.rx = rng.uniform(2.0, 3.5);
    s.ry = rng.uniform(2.0, 3.5);
    s.depth = rng.uniform(0.45, 0.60);
    scene.stenoses.push_back(s);
    scene.vessels.push_back(random_vessel(rng, s.cx, s.cy));
  }
  const auto distractors = rng.uniform_int(0, 1);
  for (std::int64_t i = 0; i < distractors; ++i) {
    scene.vessels.push_back(random_vessel(rng, rng.uniform(0.0, p.image_size),
                                          rng.uniform(0.0, p.image_size)));
  }
  return scene;
}

// Frame-to-frame motion within a contrast sequence.
Scene jitter_scene(const Scene& base, const ClientProfile& p, Rng& rng) {
  const double cell = static_cast<double>(p.image_size) / p.grid;
  Scene s = base;
  for (std::size_t i = 0; i < s.stenoses.size(); ++i) {
    auto& st = s.stenoses[i];
    // Stay inside the original cell so the target cell is stable.
    const double gx = std::floor(base.stenoses[i].cx / cell);
    const double gy = std::floor(base.stenoses[i].cy / cell);
    st.cx = std::clamp(st.cx + rng.normal(0.0, 0.6), gx * cell + 0.5, (gx + 1) * cell - 0.5);
    st.cy = std::clamp(st.cy + rng.normal(0.0, 0.6), gy * cell + 0.5, (gy + 1) * cell - 0.5);
    st.rx = std::clamp(st.rx + rng.normal(0.0, 0.15), 2.0, 3.5);
    st.ry = std::clamp(st.ry + rng.normal(0.0, 0.15), 2.0, 3.5);
    s.vessels[i].x0 = st.cx;
    s.vessels[i].y0 = st.cy;
  }
  for (auto& v : s.vessels) v.angle += rng.normal(0.0, 0.05);
  return s;
}

DetectionSample render(const Scene& scene, const ClientProfile& p, double patient_offset,
                       Rng& rng, const std::string& patient_id) {
  const std::size_t n = p.image_size;
  std::vector<double> px(n * n);
  for (auto& v : px) v = rng.normal(p.intensity_mean + patient_offset, p.intensity_std);

  std::vector<double> dist2(n * n);
  for (const auto& v : scene.vessels) {
    std::fill(dist2.begin(), dist2.end(), 1e9);
    const double dx = std::cos(v.angle), dy = std::sin(v.angle);
    const double base = std::sin(v.phase);
    const double extent = 1.5 * static_cast<double>(n);
    for (double t = -extent; t <= extent; t += 0.25) {
      const double off = v.amplitude * (std::sin(v.frequency * t + v.phase) - base);
      const double x = v.x0 + t * dx - off * dy;
      const double y = v.y0 + t * dy + off * dx;
      const auto xi0 = static_cast<long>(std::floor(x)) - 4;
      const auto yi0 = static_cast<long>(std::floor(y)) - 4;
      for (long yi = std::max(0L, yi0); yi <= std::min<long>(n - 1, yi0 + 8); ++yi) {
        for (long xi = std::max(0L, xi0); xi <= std::min<long>(n - 1, xi0 + 8); ++xi) {
          const double ex = xi + 0.5 - x, ey = yi + 0.5 - y;
          double& d = dist2[yi * n + xi];
          d = std::min(d, ex * ex + ey * ey);
        }
      }
    }
    const double inv = 1.0 / (2.0 * v.sigma * v.sigma);
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (dist2[i] < 1e8) px[i] += v.brightness * std::exp(-dist2[i] * inv);
    }
  }

  DetectionSample sample;
  sample.patient_id = patient_id;
  const float size = static_cast<float>(n);
  for (const auto& s : scene.stenoses) {
    for (std::size_t yi = 0; yi < n; ++yi) {
      for (std::size_t xi = 0; xi < n; ++xi) {
        const double qx = (xi + 0.5 - s.cx) / s.rx, qy = (yi + 0.5 - s.cy) / s.ry;
        px[yi * n + xi] -= s.depth * std::exp(-2.0 * (qx * qx + qy * qy));
      }
    }
    Box b{static_cast<float>(s.cx - s.rx - 1.0), static_cast<float>(s.cy - s.ry - 1.0),
          static_cast<float>(s.cx + s.rx + 1.0), static_cast<float>(s.cy + s.ry + 1.0)};
    b.x_min = std::clamp(b.x_min, 0.0f, size);
    b.y_min = std::clamp(b.y_min, 0.0f, size);
    b.x_max = std::clamp(b.x_max, 0.0f, size);
    b.y_max = std::clamp(b.y_max, 0.0f, size);
    sample.boxes.push_back(b);
  }

  std::vector<float> data(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    data[i] = static_cast<float>(std::clamp(px[i], 0.0, 1.0));
  }
  sample.image = Tensor({1, n, n}, std::move(data));
  return sample;
}

// Picks k test patients whose image total is closest to the target share.
std::vector<bool> choose_test_patients(const std::vector<std::size_t>& counts, double fraction,
                                       Rng& rng) {
  const std::size_t n = counts.size();
  const auto k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(static_cast<double>(n) * fraction)), 1, n - 1);
  const double target =
      fraction * static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::vector<bool> test(n, false);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    test[order[i]] = true;
    sum += static_cast<double>(counts[order[i]]);
  }
  // Best-improvement swaps; each strictly reduces the gap, so this ends.
  for (;;) {
    double best_gap = std::abs(sum - target);
    std::size_t best_in = n, best_out = n;
    for (std::size_t a = 0; a < n; ++a) {
      if (!test[a]) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (test[b]) continue;
        const double gap = std::abs(sum - static_cast<double>(counts[a]) +
                                    static_cast<double>(counts[b]) - target);
        if (gap < best_gap - 1e-12) {
          best_gap = gap;
          best_in = a;
          best_out = b;
        }
      }
    }
    if (best_in == n) break;
    test[best_in] = false;
    test[best_out] = true;
    sum += static_cast<double>(counts[best_out]) - static_cast<double>(counts[best_in]);
  }
  return test;
}

}  // namespace

SplitDataset generate(const ClientProfile& profile, std::uint64_t seed) {
  profile.validate();
  Rng rng(seed);

  std::vector<std::vector<DetectionSample>> by_patient(profile.n_patients);
  for (std::uint32_t p = 0; p < profile.n_patients; ++p) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s-p%03u", profile.client_id.c_str(), p);
    const auto n_images = rng.uniform_int(profile.min_images_per_patient,
                                          profile.max_images_per_patient);
    const double patient_offset = rng.normal(0.0, 0.02);
    const Scene base = random_scene(profile, rng);
    for (std::int64_t i = 0; i < n_images; ++i) {
      Scene scene = profile.sequential ? (i == 0 ? base : jitter_scene(base, profile, rng))
                                       : random_scene(profile, rng);
      by_patient[p].push_back(render(scene, profile, patient_offset, rng, id));
    }
  }

  std::vector<std::size_t> counts;
  for (const auto& v : by_patient) counts.push_back(v.size());
  const std::vector<bool> is_test = choose_test_patients(counts, profile.test_fraction, rng);

  SplitDataset out;
  out.client_id = profile.client_id;
  for (std::uint32_t p = 0; p < profile.n_patients; ++p) {
    auto& dst = is_test[p] ? out.test : out.train;
    for (auto& s : by_patient[p]) dst.push_back(std::move(s));
  }
  return out;
}

namespace {

void accumulate_pixels(std::span<const DetectionSample> samples, std::vector<std::uint64_t>& counts,
                       std::uint64_t& total) {
  const std::size_t n_bins = counts.size();
  for (const auto& s : samples) {
    for (float v : s.image.data()) {
      auto bin = static_cast<std::size_t>(std::clamp(static_cast<double>(v), 0.0, 1.0) *
                                          static_cast<double>(n_bins));
      ++counts[std::min(bin, n_bins - 1)];
      ++total;
    }
  }
}

std::vector<double> normalized_histogram(
    std::initializer_list<std::span<const DetectionSample>> parts, std::size_t n_bins) {
  if (n_bins == 0) throw InvalidArgumentError("intensity_histogram: n_bins must be positive");
  std::vector<std::uint64_t> counts(n_bins, 0);
  std::uint64_t total = 0;
  for (auto part : parts) accumulate_pixels(part, counts, total);
  if (total == 0) throw InvalidArgumentError("intensity_histogram: empty dataset");
  std::vector<double> hist(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    hist[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return hist;
}

}  // namespace

std::vector<double> intensity_histogram(std::span<const DetectionSample> samples,
                                        std::size_t n_bins) {
  return normalized_histogram({samples}, n_bins);
}

std::vector<double> intensity_histogram(const SplitDataset& dataset, std::size_t n_bins) {
  return normalized_histogram({dataset.train, dataset.test}, n_bins);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgumentError("ks_distance: bin counts differ");
  double ca = 0.0, cb = 0.0, best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
    best = std::max(best, std::abs(ca - cb));
  }
  return best;
}

}  // namespace fedsten::data
