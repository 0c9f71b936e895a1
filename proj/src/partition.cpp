#include "mcr2/partition.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace mcr2 {

ClassPartition::ClassPartition(std::vector<int> class_sizes)
    : sizes_(std::move(class_sizes)) {
  if (sizes_.empty()) {
    throw std::invalid_argument("ClassPartition: class_sizes must be nonempty");
  }
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    if (sizes_[k] < 1) {
      throw std::invalid_argument("ClassPartition: class " + std::to_string(k) +
                                  " has size " + std::to_string(sizes_[k]) +
                                  ", expected >= 1");
    }
    offsets_.push_back(offsets_.back() + sizes_[k]);
    max_size_ = std::max(max_size_, sizes_[k]);
  }
}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd entries, ClassPartition partition)
    : entries_(std::move(entries)), partition_(std::move(partition)) {
  if (entries_.cols() != partition_.total()) {
    throw std::invalid_argument(
        "FeatureMatrix: entries have " + std::to_string(entries_.cols()) +
        " columns but the partition totals " + std::to_string(partition_.total()));
  }
  if (entries_.rows() < 1) {
    throw std::invalid_argument("FeatureMatrix: entries must have at least one row");
  }
}

FeatureMatrix FeatureMatrix::zero(int d, ClassPartition partition) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(d, partition.total());
  return FeatureMatrix(std::move(z), std::move(partition));
}

}  // namespace mcr2
