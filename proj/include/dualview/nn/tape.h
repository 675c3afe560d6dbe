#pragma once

#include "dualview/nn/matrix.h"
#include "dualview/nn/parameter.h"

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <vector>

namespace dualview::nn {

template <typename T>
class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Matrix<T>& value() const { return tape->value(id); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Reverse-mode recorder. Each op appends a node holding its output value and a
// closure that, given the node's output gradient, accumulates gradients into
// its inputs. Parameter leaves accumulate straight into Parameter::grad().
//
// A tape built with record=false keeps values only, which is the inference
// path; it never touches parameter gradients and is safe to use concurrently
// against a shared frozen model (one tape per thread).
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix<T>& grad_out)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  Var<T> constant(Matrix<T> value);
  Var<T> parameter(Parameter<T>& p);

  const Matrix<T>& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.ref != nullptr ? *n.ref : n.value;
  }

  // Appends an op node. `fn` is dropped when no input needs a gradient.
  Var<T> emit(Matrix<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn);
  Var<T> emit(Matrix<T> value, const std::vector<Var<T>>& inputs, BackwardFn fn);

  bool requires_grad(Var<T> v) const { return nodes_[v.id].requires_grad; }

  // Gradient buffer of a node, zero-initialized on first access.
  Matrix<T>& grad(Var<T> v);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded closure in reverse.
  // Throws StateError when nothing was recorded or `loss` is not a scalar.
  void backward(Var<T> loss);

 private:
  struct Node {
    Matrix<T> value;
    const Matrix<T>* ref = nullptr;
    Matrix<T> grad;
    Matrix<T>* sink = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace dualview::nn
