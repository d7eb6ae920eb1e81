#pragma once

#include <string>
#include <vector>

#include "tame/tensor.hpp"

namespace tame::idx {

// MNIST-family normalization applied on load.
constexpr float kMnistMean = 0.1307f;
constexpr float kMnistStd = 0.3081f;

// Big-endian IDX files, gzip accepted. Images come back as [N,1,H,W] with
// pixels scaled to [0,1] then normalized to (v - mean) / std.
Tensor load_images(const std::string& path, float mean = kMnistMean, float stddev = kMnistStd);
std::vector<int> load_labels(const std::string& path);

struct IdxData {
    Tensor images;
    std::vector<int> labels;
};

// Loads an image/label pair and checks the counts agree.
IdxData load_pair(const std::string& images_path, const std::string& labels_path);

}  // namespace tame::idx
