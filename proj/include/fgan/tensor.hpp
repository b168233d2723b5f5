#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fgan/errors.hpp"

namespace fgan::ad {

class Tape;

/// Dense row-major float32 tensor.
///
/// Differentiation is driven by the thread-local active Tape: an operation
/// records a backward node whenever one of its inputs is differentiable,
/// i.e. a requires_grad leaf or an intermediate produced under the active
/// tape. The (tape_id, node) pair is bookkeeping the ops maintain; a stale
/// tape_id simply means "not attached", so tensors survive their tape.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;
  bool requires_grad = false;

  mutable std::uint64_t tape_id = 0;  // 0 = none
  mutable int node = -1;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape_in, float fill = 0.0f);

  static Tensor scalar(float v);
  static Tensor from(std::vector<int> shape_in, std::vector<float> values);

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int extent(int axis) const;
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  std::string shape_str() const;

  float item() const;  // scalar value; throws ContractError on non-scalars

  /// Copy with no grad requirement and no tape attachment.
  Tensor detached() const;
};

/// Reverse-mode tape. Nodes are recorded in forward (topological) order and
/// backward() replays them exactly once in reverse, accumulating gradients
/// per node. One tape per training step; construction pushes the tape onto a
/// thread-local stack and destruction pops it, so a tape and its tensors are
/// confined to one thread.
class Tape {
 public:
  /// Receives the output gradient of the node; accumulates into the node's
  /// inputs via add_grad().
  using BackwardFn = std::function<void(Tape&, const std::vector<float>&)>;

  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active();

  std::uint64_t id() const { return id_; }
  std::size_t size() const { return nodes_.size(); }

  /// Leaf node for a differentiable tensor; idempotent per tape. Ops watch
  /// requires_grad inputs on first use, but a leaf that will be *copied*
  /// before then (e.g. an input a model forward duplicates) must be watched
  /// up front so the copies share its node id.
  int watch(const Tensor& t);

  /// Operation node. `out_numel` sizes the node's gradient buffer.
  int record(std::int64_t out_numel, BackwardFn fn);

  /// True when `t` carries a node of this tape.
  bool tracks(const Tensor& t) const;

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. `loss` must be
  /// a scalar recorded on this tape. Gradients of previous backward() calls
  /// are discarded.
  void backward(const Tensor& loss);

  bool has_grad(const Tensor& t) const;
  std::span<const float> grad(const Tensor& t) const;

  /// For backward fns: grads[node] += g.
  void add_grad(int node_id, std::span<const float> g);

  /// Mutable gradient buffer of a node, zero-initialised on first touch.
  std::vector<float>& grad_buffer(int node_id);

 private:
  struct Node {
    std::int64_t out_numel;
    BackwardFn fn;  // empty for leaves
  };

  std::vector<Node> nodes_;
  std::vector<std::vector<float>> grads_;  // empty vector = never touched
  std::uint64_t id_;
};

/// Node id of `t` under the active tape for use as an op input: existing node
/// if tracked, a fresh leaf if t.requires_grad, otherwise -1 (constant).
int input_node(Tape* tape, const Tensor& t);

/// Convenience: backward on the active tape.
void backward(const Tensor& loss);

}  // namespace fgan::ad
