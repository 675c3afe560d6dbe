#include "dualview/nn/tape.h"

#include "dualview/errors.h"

namespace dualview::nn {

template <typename T>
Var<T> Tape<T>::constant(Matrix<T> value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var<T>{this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::parameter(Parameter<T>& p) {
  Node n;
  n.ref = &p.value();
  if (record_) {
    n.sink = &p.grad();
    n.requires_grad = true;
  }
  nodes_.push_back(std::move(n));
  return Var<T>{this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::emit(Matrix<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn) {
  return emit(std::move(value), std::vector<Var<T>>(inputs), std::move(fn));
}

template <typename T>
Var<T> Tape<T>::emit(Matrix<T> value, const std::vector<Var<T>>& inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const auto& in : inputs) {
      if (in.tape != this) throw StateError("op input recorded on a different tape");
      if (nodes_[in.id].requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) n.backward = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return Var<T>{this, nodes_.size() - 1};
}

template <typename T>
Matrix<T>& Tape<T>::grad(Var<T> v) {
  Node& n = nodes_[v.id];
  n.has_grad = true;
  if (n.sink != nullptr) return *n.sink;
  if (n.grad.size() == 0) {
    const Matrix<T>& val = value(v.id);
    n.grad = Matrix<T>::Zero(val.rows(), val.cols());
  }
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (!record_) throw StateError("backward on a tape built without gradient recording");
  if (nodes_.empty() || loss.tape != this || loss.id >= nodes_.size()) {
    throw StateError("backward called before any forward pass was recorded");
  }
  const Matrix<T>& lv = value(loss.id);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw StateError("backward requires a scalar loss, got " + shape_string(lv));
  }
  if (!nodes_[loss.id].requires_grad) {
    throw StateError("loss does not depend on any parameter");
  }
  grad(loss)(0, 0) += T(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace dualview::nn
