#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mogam/matrix.hpp"

namespace mogam::ad {

// Reverse-mode automatic differentiation over dense double matrices.
//
// Expressions are immutable DAGs of shared nodes; shapes are fixed at
// construction time, so every shape error surfaces where the graph is
// built, not inside a training loop. Nodes are safe to share read-only
// across threads; evaluation itself is single-threaded per call.

enum class OpKind {
    Input,
    Constant,
    MatMul,
    Add,
    Mul,         // elementwise
    ScalarMul,   // multiply by a host constant
    ConcatCols,
    RowMean,     // mean over rows -> 1 x cols
    SoftmaxRows,
    Sigmoid,
    Relu,
    LeakyRelu,
    Transpose,
    Sum,                      // full sum -> 1 x 1
    BinaryCrossEntropy,       // mean over entries -> 1 x 1
    CategoricalCrossEntropy,  // mean over rows -> 1 x 1
};

const char* op_name(OpKind kind);

class Node;
using Expr = std::shared_ptr<const Node>;

class Node {
public:
    OpKind kind;
    int rows = 0;
    int cols = 0;
    std::vector<Expr> operands;

    // Input nodes
    std::string name;
    bool trainable = false;

    // Constant nodes
    Matrix value;

    // ScalarMul factor or LeakyRelu slope
    double attr = 0.0;
};

// Graph construction. Every builder validates operand shapes and throws
// std::invalid_argument naming the op on a mismatch.
Expr input(const std::string& name, int rows, int cols, bool trainable = true);
Expr constant(Matrix value);
Expr matmul(const Expr& a, const Expr& b);
Expr add(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b);
Expr scalar_mul(const Expr& a, double c);
Expr concat_cols(const Expr& a, const Expr& b);
Expr row_mean(const Expr& a);
Expr softmax_rows(const Expr& a);
Expr sigmoid(const Expr& a);
Expr relu(const Expr& a);
Expr leaky_relu(const Expr& a, double slope);
Expr transpose(const Expr& a);
Expr sum(const Expr& a);
Expr binary_cross_entropy(const Expr& predictions, const Expr& targets);
Expr categorical_cross_entropy(const Expr& predictions, const Expr& targets);

using Bindings = std::unordered_map<std::string, Matrix>;
using GradientMap = std::unordered_map<std::string, Matrix>;

// Deterministic forward pass: identical bindings give bit-identical output.
Matrix evaluate(const Expr& root, const Bindings& bindings);

// d(root)/d(input) for every trainable input, single reverse sweep.
// The root must evaluate to a 1x1 scalar.
GradientMap gradients(const Expr& root, const Bindings& bindings);

// Names of trainable / all input nodes reachable from root.
std::vector<std::string> trainable_inputs(const Expr& root);

// Max over all trainable entries of |analytic - numeric| /
// max(|analytic|, |numeric|, 1e-8), with numeric the central difference
// (f(x+h) - f(x-h)) / 2h.
double finite_difference_check(const Expr& root, const Bindings& bindings, double step);

}  // namespace mogam::ad
