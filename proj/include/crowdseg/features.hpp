#pragma once

#include "crowdseg/grid.hpp"

namespace crowdseg {

// Rec. 601 luma: 0.299 R + 0.587 G + 0.114 B.
ScalarMap luma(const RgbImage& img);

// Gradient magnitude sqrt(gx^2 + gy^2): central differences in the interior,
// one-sided differences on the borders so every pixel is defined.
// Requires height, width >= 2.
ScalarMap gradient_magnitude(const ScalarMap& gray);

// Simple per-pixel descriptor for desk-scale scenes: mean R, G, B and mean
// gradient magnitude over an odd window (edge-replicated), D = 4.
FeatureMap builtin_features(const RgbImage& img, int window);

}  // namespace crowdseg
