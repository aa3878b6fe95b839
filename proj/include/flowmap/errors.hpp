#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowmap {

/// A state or derivative stopped being finite (integration blow-up,
/// exploding parameters). Carries the index of the offending item so
/// callers can report which pair/step/iteration failed.
class NonFiniteStateError : public std::runtime_error {
 public:
  explicit NonFiniteStateError(std::string what, std::size_t index = 0)
      : std::runtime_error(std::move(what)), index_(index) {}

  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Training produced a non-finite loss; records where it happened so the
/// caller can retry with a smaller learning rate.
class TrainDivergedError : public std::runtime_error {
 public:
  TrainDivergedError(std::string what, std::size_t iteration, std::size_t pair_index)
      : std::runtime_error(std::move(what)), iteration_(iteration), pair_index_(pair_index) {}

  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }
  [[nodiscard]] std::size_t pair_index() const noexcept { return pair_index_; }

 private:
  std::size_t iteration_;
  std::size_t pair_index_;
};

}  // namespace flowmap
