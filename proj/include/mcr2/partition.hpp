#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mcr2 {

// Column layout of a class-sorted sample matrix: per-class counts m_k plus
// the derived prefix offsets. Immutable once constructed.
class ClassPartition {
 public:
  // Throws std::invalid_argument if the list is empty or any size is < 1.
  explicit ClassPartition(std::vector<int> class_sizes);

  int num_classes() const noexcept { return static_cast<int>(sizes_.size()); }
  int total() const noexcept { return offsets_.back(); }
  int size(int k) const { return sizes_.at(static_cast<std::size_t>(k)); }
  int offset(int k) const { return offsets_.at(static_cast<std::size_t>(k)); }
  int max_size() const noexcept { return max_size_; }
  const std::vector<int>& class_sizes() const noexcept { return sizes_; }

  friend bool operator==(const ClassPartition& a, const ClassPartition& b) {
    return a.sizes_ == b.sizes_;
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;  // length K+1, offsets_[K] == total
  int max_size_ = 0;
};

// A d x m feature matrix bundled with the partition that names its column
// blocks. Access is read-only; block(k) views columns of class k in place.
class FeatureMatrix {
 public:
  // Throws std::invalid_argument if entries.cols() != partition.total().
  FeatureMatrix(Eigen::MatrixXd entries, ClassPartition partition);

  static FeatureMatrix zero(int d, ClassPartition partition);

  int d() const noexcept { return static_cast<int>(entries_.rows()); }
  int m() const noexcept { return static_cast<int>(entries_.cols()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  const ClassPartition& partition() const noexcept { return partition_; }

  // View of class k's columns; no copy, bit-identical to the stored entries.
  Eigen::Ref<const Eigen::MatrixXd> block(int k) const {
    return entries_.middleCols(partition_.offset(k), partition_.size(k));
  }

 private:
  Eigen::MatrixXd entries_;
  ClassPartition partition_;
};

}  // namespace mcr2
