#include "fgan/tensor.hpp"

#include <cmath>
#include <sstream>

namespace fgan::ad {

namespace {

std::int64_t shape_product(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int e : shape) {
    if (e < 1) throw ShapeError("tensor extent must be >= 1, got " + std::to_string(e));
    n *= e;
  }
  return n;
}

thread_local std::vector<Tape*> g_tape_stack;
thread_local std::uint64_t g_next_tape_id = 1;

}  // namespace

Tensor::Tensor(std::vector<int> shape_in, float fill) : shape(std::move(shape_in)) {
  data.assign(static_cast<std::size_t>(shape_product(shape)), fill);
}

Tensor Tensor::scalar(float v) {
  Tensor t({1});
  t.data[0] = v;
  return t;
}

Tensor Tensor::from(std::vector<int> shape_in, std::vector<float> values) {
  Tensor t;
  t.shape = std::move(shape_in);
  if (shape_product(t.shape) != static_cast<std::int64_t>(values.size())) {
    throw ShapeError("value count does not match shape product");
  }
  t.data = std::move(values);
  return t;
}

int Tensor::extent(int axis) const {
  if (axis < 0 || axis >= rank()) throw ShapeError("axis out of range");
  return shape[axis];
}

bool Tensor::all_finite() const {
  for (float v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

float Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on non-scalar tensor " + shape_str());
  return data[0];
}

Tensor Tensor::detached() const {
  Tensor t;
  t.shape = shape;
  t.data = data;
  return t;
}

Tape::Tape() : id_(g_next_tape_id++) { g_tape_stack.push_back(this); }

Tape::~Tape() {
  // Tapes are scoped objects; enforce stack discipline.
  if (!g_tape_stack.empty() && g_tape_stack.back() == this) g_tape_stack.pop_back();
}

Tape* Tape::active() { return g_tape_stack.empty() ? nullptr : g_tape_stack.back(); }

int Tape::watch(const Tensor& t) {
  if (tracks(t)) return t.node;
  const int id = record(t.numel(), nullptr);
  t.tape_id = id_;
  t.node = id;
  return id;
}

int Tape::record(std::int64_t out_numel, BackwardFn fn) {
  nodes_.push_back(Node{out_numel, std::move(fn)});
  grads_.emplace_back();
  return static_cast<int>(nodes_.size()) - 1;
}

bool Tape::tracks(const Tensor& t) const {
  return t.tape_id == id_ && t.node >= 0 &&
         t.node < static_cast<int>(nodes_.size());
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw ContractError("backward() expects a scalar loss, got " + loss.shape_str());
  }
  if (!tracks(loss)) {
    throw ContractError("backward() loss is not recorded on this tape");
  }
  for (auto& g : grads_) g.clear();
  grads_[loss.node].assign(1, 1.0f);
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    if (nodes_[i].fn && !grads_[i].empty()) {
      nodes_[i].fn(*this, grads_[i]);
    }
  }
}

bool Tape::has_grad(const Tensor& t) const {
  return tracks(t) && !grads_[t.node].empty();
}

std::span<const float> Tape::grad(const Tensor& t) const {
  if (!has_grad(t)) {
    throw ContractError("no gradient recorded for this tensor");
  }
  return grads_[t.node];
}

void Tape::add_grad(int node_id, std::span<const float> g) {
  auto& buf = grad_buffer(node_id);
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

std::vector<float>& Tape::grad_buffer(int node_id) {
  auto& buf = grads_[node_id];
  if (buf.empty()) buf.assign(static_cast<std::size_t>(nodes_[node_id].out_numel), 0.0f);
  return buf;
}

int input_node(Tape* tape, const Tensor& t) {
  if (!tape) return -1;
  if (tape->tracks(t)) return t.node;
  if (t.requires_grad) return tape->watch(t);
  return -1;
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (!tape) throw ContractError("backward() with no active tape");
  tape->backward(loss);
}

}  // namespace fgan::ad
