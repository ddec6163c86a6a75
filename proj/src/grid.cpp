#include "tdet/grid.hpp"

#include <string>

namespace tdet {

DenseGrid::DenseGrid(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  contract(channels > 0 && height > 0 && width > 0,
           "DenseGrid: dimensions must be positive");
  values_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

DenseGrid::DenseGrid(int channels, int height, int width,
                     std::vector<float> values)
    : channels_(channels), height_(height), width_(width),
      values_(std::move(values)) {
  contract(channels > 0 && height > 0 && width > 0,
           "DenseGrid: dimensions must be positive");
  contract(values_.size() == static_cast<std::size_t>(channels) * height * width,
           "DenseGrid: value count does not match shape");
}

std::size_t DenseGrid::index(int c, int i, int j) const {
  if (c < 0 || c >= channels_ || i < 0 || i >= height_ || j < 0 || j >= width_) {
    throw ContractError("DenseGrid: index (" + std::to_string(c) + "," +
                        std::to_string(i) + "," + std::to_string(j) +
                        ") out of range for shape [" + std::to_string(channels_) +
                        "," + std::to_string(height_) + "," +
                        std::to_string(width_) + "]");
  }
  return (static_cast<std::size_t>(c) * height_ + i) * width_ + j;
}

}  // namespace tdet
