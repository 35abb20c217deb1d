#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "airfl/dataio.hpp"
#include "airfl/rng.hpp"

namespace airfl {

/// Deterministic generator of 28x28 handwritten-digit-style images in the
/// same IDX layout as the standard MNIST files. Digits are seven-segment
/// glyphs with per-sample translation, intensity, segment dropout, and pixel
/// noise, which keeps the even/odd parity task learnable but not trivial.
struct DigitImageOptions {
  int max_shift = 3;            // uniform +/- pixel translation
  double min_intensity = 0.70;  // per-sample stroke intensity in [min, 1]
  double segment_drop_prob = 0.07;
  double pixel_noise_std = 0.18;
};

namespace detail {

struct SegmentRect {
  int row0, row1, col0, col1;  // half-open pixel ranges
};

// A,B,C,D,E,F,G in a 28x28 canvas (rows 4..24, cols 9..19, stroke 3).
inline const std::array<SegmentRect, 7>& segment_rects() {
  static const std::array<SegmentRect, 7> rects = {{
      {4, 7, 10, 18},    // A  top bar
      {5, 14, 16, 19},   // B  upper right
      {14, 23, 16, 19},  // C  lower right
      {21, 24, 10, 18},  // D  bottom bar
      {14, 23, 9, 12},   // E  lower left
      {5, 14, 9, 12},    // F  upper left
      {12, 15, 10, 18},  // G  middle bar
  }};
  return rects;
}

inline unsigned segment_mask(int digit) {
  // bit order: A=1, B=2, C=4, D=8, E=16, F=32, G=64
  static const std::array<unsigned, 10> masks = {{
      0b0111111,  // 0
      0b0000110,  // 1
      0b1011011,  // 2
      0b1001111,  // 3
      0b1100110,  // 4
      0b1101101,  // 5
      0b1111101,  // 6
      0b0000111,  // 7
      0b1111111,  // 8
      0b1101111,  // 9
  }};
  return masks[static_cast<std::size_t>(digit)];
}

}  // namespace detail

struct DigitDataset {
  IdxTensor images;  // [N, 28, 28] unsigned bytes
  IdxTensor labels;  // [N] unsigned bytes, digits 0..9
};

inline DigitDataset make_digit_images(long count, Rng& rng,
                                      const DigitImageOptions& opt = {}) {
  if (count < 1) throw std::invalid_argument("make_digit_images: count must be >= 1");
  constexpr int side = 28;
  DigitDataset out;
  out.images.dtype = IdxType::u8;
  out.images.dims = {static_cast<std::uint32_t>(count), side, side};
  out.images.payload.resize(static_cast<std::size_t>(count) * side * side);
  out.labels.dtype = IdxType::u8;
  out.labels.dims = {static_cast<std::uint32_t>(count)};
  out.labels.payload.resize(static_cast<std::size_t>(count));

  std::array<double, side * side> canvas{};
  for (long n = 0; n < count; ++n) {
    const int digit = static_cast<int>(rng.bounded(10));
    const int shift_span = 2 * opt.max_shift + 1;
    const int dx = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(shift_span))) -
                   opt.max_shift;
    const int dy = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(shift_span))) -
                   opt.max_shift;
    const double intensity = rng.uniform(opt.min_intensity, 1.0);

    canvas.fill(0.0);
    const unsigned mask = detail::segment_mask(digit);
    for (std::size_t s = 0; s < detail::segment_rects().size(); ++s) {
      if ((mask & (1u << s)) == 0) continue;
      if (rng.uniform01() < opt.segment_drop_prob) continue;
      const detail::SegmentRect& r = detail::segment_rects()[s];
      for (int row = r.row0; row < r.row1; ++row)
        for (int col = r.col0; col < r.col1; ++col) {
          const int rr = row + dy;
          const int cc = col + dx;
          if (rr < 0 || rr >= side || cc < 0 || cc >= side) continue;
          canvas[static_cast<std::size_t>(rr * side + cc)] = intensity;
        }
    }

    for (int p = 0; p < side * side; ++p) {
      double v = canvas[static_cast<std::size_t>(p)];
      if (opt.pixel_noise_std > 0.0) v += opt.pixel_noise_std * rng.gaussian();
      v = std::clamp(v, 0.0, 1.0);
      out.images.payload[static_cast<std::size_t>(n) * side * side +
                         static_cast<std::size_t>(p)] =
          static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    out.labels.payload[static_cast<std::size_t>(n)] = static_cast<std::uint8_t>(digit);
  }
  return out;
}

/// Parity-labeled dataset straight from an image/label tensor pair.
inline LabeledDataset parity_dataset(const IdxTensor& images, const IdxTensor& labels,
                                     bool append_bias = true) {
  if (labels.dims.size() != 1 || labels.dtype != IdxType::u8)
    throw std::invalid_argument("parity_dataset: expected a [N] unsigned byte label tensor");
  if (images.dims.empty() || images.dims[0] != labels.dims[0])
    throw std::invalid_argument("parity_dataset: image/label count mismatch");
  LabeledDataset out;
  out.features = image_features(images, append_bias);
  out.labels = parity_labels(labels.payload);
  out.validate();
  return out;
}

}  // namespace airfl
