#include "mogam/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mogam::ad {

namespace {

constexpr double kProbFloor = 1e-12;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
    throw std::invalid_argument(std::string(op) + ": " + detail);
}

std::shared_ptr<Node> make_node(OpKind kind, int rows, int cols, std::vector<Expr> operands) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->rows = rows;
    n->cols = cols;
    n->operands = std::move(operands);
    return n;
}

void require(const Expr& e, const char* op) {
    if (!e) shape_error(op, "null operand");
}

double clamp_prob(double p) { return std::min(1.0 - kProbFloor, std::max(kProbFloor, p)); }

}  // namespace

const char* op_name(OpKind kind) {
    switch (kind) {
        case OpKind::Input: return "input";
        case OpKind::Constant: return "constant";
        case OpKind::MatMul: return "matmul";
        case OpKind::Add: return "add";
        case OpKind::Mul: return "elementwise-multiply";
        case OpKind::ScalarMul: return "scalar-multiply";
        case OpKind::ConcatCols: return "concat-columns";
        case OpKind::RowMean: return "row-mean";
        case OpKind::SoftmaxRows: return "softmax-rows";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Relu: return "relu";
        case OpKind::LeakyRelu: return "leaky-relu";
        case OpKind::Transpose: return "transpose";
        case OpKind::Sum: return "sum";
        case OpKind::BinaryCrossEntropy: return "binary-cross-entropy";
        case OpKind::CategoricalCrossEntropy: return "categorical-cross-entropy";
    }
    return "unknown";
}

Expr input(const std::string& name, int rows, int cols, bool trainable) {
    if (name.empty()) shape_error("input", "input nodes need a name");
    if (rows < 1 || cols < 1) shape_error("input", "'" + name + "' must have positive shape");
    auto n = make_node(OpKind::Input, rows, cols, {});
    n->name = name;
    n->trainable = trainable;
    return n;
}

Expr constant(Matrix value) {
    if (value.rows() < 1 || value.cols() < 1) shape_error("constant", "empty matrix");
    auto n = make_node(OpKind::Constant, value.rows(), value.cols(), {});
    n->value = std::move(value);
    return n;
}

Expr matmul(const Expr& a, const Expr& b) {
    require(a, "matmul");
    require(b, "matmul");
    if (a->cols != b->rows) {
        shape_error("matmul", "inner dimensions disagree (" + std::to_string(a->rows) + "x" +
                                  std::to_string(a->cols) + " * " + std::to_string(b->rows) +
                                  "x" + std::to_string(b->cols) + ")");
    }
    return make_node(OpKind::MatMul, a->rows, b->cols, {a, b});
}

namespace {
Expr elementwise_pair(OpKind kind, const Expr& a, const Expr& b) {
    require(a, op_name(kind));
    require(b, op_name(kind));
    if (a->rows != b->rows || a->cols != b->cols) {
        shape_error(op_name(kind), "operand shapes differ (" + std::to_string(a->rows) + "x" +
                                       std::to_string(a->cols) + " vs " +
                                       std::to_string(b->rows) + "x" + std::to_string(b->cols) +
                                       ")");
    }
    return make_node(kind, a->rows, a->cols, {a, b});
}
}  // namespace

Expr add(const Expr& a, const Expr& b) { return elementwise_pair(OpKind::Add, a, b); }
Expr mul(const Expr& a, const Expr& b) { return elementwise_pair(OpKind::Mul, a, b); }

Expr scalar_mul(const Expr& a, double c) {
    require(a, "scalar-multiply");
    auto n = make_node(OpKind::ScalarMul, a->rows, a->cols, {a});
    n->attr = c;
    return n;
}

Expr concat_cols(const Expr& a, const Expr& b) {
    require(a, "concat-columns");
    require(b, "concat-columns");
    if (a->rows != b->rows) {
        shape_error("concat-columns", "row counts differ (" + std::to_string(a->rows) + " vs " +
                                          std::to_string(b->rows) + ")");
    }
    return make_node(OpKind::ConcatCols, a->rows, a->cols + b->cols, {a, b});
}

Expr row_mean(const Expr& a) {
    require(a, "row-mean");
    return make_node(OpKind::RowMean, 1, a->cols, {a});
}

Expr softmax_rows(const Expr& a) {
    require(a, "softmax-rows");
    return make_node(OpKind::SoftmaxRows, a->rows, a->cols, {a});
}

Expr sigmoid(const Expr& a) {
    require(a, "sigmoid");
    return make_node(OpKind::Sigmoid, a->rows, a->cols, {a});
}

Expr relu(const Expr& a) {
    require(a, "relu");
    return make_node(OpKind::Relu, a->rows, a->cols, {a});
}

Expr leaky_relu(const Expr& a, double slope) {
    require(a, "leaky-relu");
    auto n = make_node(OpKind::LeakyRelu, a->rows, a->cols, {a});
    n->attr = slope;
    return n;
}

Expr transpose(const Expr& a) {
    require(a, "transpose");
    return make_node(OpKind::Transpose, a->cols, a->rows, {a});
}

Expr sum(const Expr& a) {
    require(a, "sum");
    return make_node(OpKind::Sum, 1, 1, {a});
}

namespace {
Expr loss_pair(OpKind kind, const Expr& pred, const Expr& target) {
    require(pred, op_name(kind));
    require(target, op_name(kind));
    if (pred->rows != target->rows || pred->cols != target->cols) {
        shape_error(op_name(kind), "prediction/target shapes differ");
    }
    return make_node(kind, 1, 1, {pred, target});
}
}  // namespace

Expr binary_cross_entropy(const Expr& predictions, const Expr& targets) {
    return loss_pair(OpKind::BinaryCrossEntropy, predictions, targets);
}

Expr categorical_cross_entropy(const Expr& predictions, const Expr& targets) {
    return loss_pair(OpKind::CategoricalCrossEntropy, predictions, targets);
}

// ---------------------------------------------------------------------------
// Forward evaluation

namespace {

using ValueMap = std::unordered_map<const Node*, Matrix>;

void topo_order(const Expr& root, std::vector<const Node*>& order) {
    std::unordered_map<const Node*, bool> visited;
    std::vector<std::pair<const Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->operands.size()) {
            const Node* child = node->operands[next_child].get();
            ++next_child;
            if (!visited[child]) {
                visited[child] = true;
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

Matrix forward_op(const Node* node, const std::vector<const Matrix*>& in) {
    switch (node->kind) {
        case OpKind::MatMul:
            return matmul(*in[0], *in[1]);
        case OpKind::Add:
            return mogam::add(*in[0], *in[1]);
        case OpKind::Mul:
            return hadamard(*in[0], *in[1]);
        case OpKind::ScalarMul:
            return scale(*in[0], node->attr);
        case OpKind::ConcatCols: {
            const Matrix& a = *in[0];
            const Matrix& b = *in[1];
            Matrix out(a.rows(), a.cols() + b.cols());
            for (int i = 0; i < a.rows(); ++i) {
                for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
                for (int j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
            }
            return out;
        }
        case OpKind::RowMean: {
            const Matrix& a = *in[0];
            Matrix out(1, a.cols(), 0.0);
            for (int i = 0; i < a.rows(); ++i)
                for (int j = 0; j < a.cols(); ++j) out(0, j) += a(i, j);
            const double inv = 1.0 / a.rows();
            for (int j = 0; j < a.cols(); ++j) out(0, j) *= inv;
            return out;
        }
        case OpKind::SoftmaxRows: {
            const Matrix& a = *in[0];
            Matrix out(a.rows(), a.cols());
            for (int i = 0; i < a.rows(); ++i) {
                double mx = a(i, 0);
                for (int j = 1; j < a.cols(); ++j) mx = std::max(mx, a(i, j));
                double denom = 0.0;
                for (int j = 0; j < a.cols(); ++j) {
                    out(i, j) = std::exp(a(i, j) - mx);
                    denom += out(i, j);
                }
                for (int j = 0; j < a.cols(); ++j) out(i, j) /= denom;
            }
            return out;
        }
        case OpKind::Sigmoid: {
            Matrix out = *in[0];
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double x = out.data()[i];
                // Branch on sign so the exponential never overflows.
                out.data()[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                         : std::exp(x) / (1.0 + std::exp(x));
            }
            return out;
        }
        case OpKind::Relu: {
            Matrix out = *in[0];
            for (std::size_t i = 0; i < out.size(); ++i)
                out.data()[i] = std::max(0.0, out.data()[i]);
            return out;
        }
        case OpKind::LeakyRelu: {
            Matrix out = *in[0];
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double x = out.data()[i];
                out.data()[i] = x > 0.0 ? x : node->attr * x;
            }
            return out;
        }
        case OpKind::Transpose:
            return transpose(*in[0]);
        case OpKind::Sum: {
            double s = 0.0;
            for (std::size_t i = 0; i < in[0]->size(); ++i) s += in[0]->data()[i];
            Matrix out(1, 1);
            out(0, 0) = s;
            return out;
        }
        case OpKind::BinaryCrossEntropy: {
            const Matrix& p = *in[0];
            const Matrix& y = *in[1];
            double total = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double pi = clamp_prob(p.data()[i]);
                const double yi = y.data()[i];
                total += -(yi * std::log(pi) + (1.0 - yi) * std::log(1.0 - pi));
            }
            Matrix out(1, 1);
            out(0, 0) = total / static_cast<double>(p.size());
            return out;
        }
        case OpKind::CategoricalCrossEntropy: {
            const Matrix& p = *in[0];
            const Matrix& y = *in[1];
            double total = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double yi = y.data()[i];
                if (yi != 0.0) total += -yi * std::log(std::max(kProbFloor, p.data()[i]));
            }
            Matrix out(1, 1);
            out(0, 0) = total / static_cast<double>(p.rows());
            return out;
        }
        case OpKind::Input:
        case OpKind::Constant:
            break;
    }
    throw std::logic_error("forward_op: unhandled op");
}

ValueMap forward_pass(const Expr& root, const Bindings& bindings,
                      const std::vector<const Node*>& order) {
    ValueMap values;
    values.reserve(order.size());
    for (const Node* node : order) {
        if (node->kind == OpKind::Input) {
            auto it = bindings.find(node->name);
            if (it == bindings.end()) {
                throw std::invalid_argument("evaluate: missing binding for input '" + node->name +
                                            "'");
            }
            if (it->second.rows() != node->rows || it->second.cols() != node->cols) {
                throw std::invalid_argument(
                    "evaluate: binding for input '" + node->name + "' has shape " +
                    it->second.shape_str() + ", declared " + std::to_string(node->rows) + "x" +
                    std::to_string(node->cols));
            }
            values.emplace(node, it->second);
        } else if (node->kind == OpKind::Constant) {
            values.emplace(node, node->value);
        } else {
            std::vector<const Matrix*> in;
            in.reserve(node->operands.size());
            for (const auto& op : node->operands) in.push_back(&values.at(op.get()));
            values.emplace(node, forward_op(node, in));
        }
    }
    return values;
}

void accumulate(Matrix& into, const Matrix& g) {
    if (into.empty())
        into = g;
    else
        for (std::size_t i = 0; i < into.size(); ++i) into.data()[i] += g.data()[i];
}

}  // namespace

Matrix evaluate(const Expr& root, const Bindings& bindings) {
    if (!root) throw std::invalid_argument("evaluate: null expression");
    std::vector<const Node*> order;
    topo_order(root, order);
    ValueMap values = forward_pass(root, bindings, order);
    return values.at(root.get());
}

GradientMap gradients(const Expr& root, const Bindings& bindings) {
    if (!root) throw std::invalid_argument("gradients: null expression");
    if (root->rows != 1 || root->cols != 1) {
        throw std::invalid_argument("gradients: root must be a 1x1 scalar, got " +
                                    std::to_string(root->rows) + "x" +
                                    std::to_string(root->cols));
    }
    std::vector<const Node*> order;
    topo_order(root, order);
    ValueMap values = forward_pass(root, bindings, order);

    std::unordered_map<const Node*, Matrix> adjoint;
    adjoint[root.get()] = Matrix(1, 1, 1.0);

    // Reverse topological order: every node is finished before its operands.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Node* node = *it;
        auto adj_it = adjoint.find(node);
        if (adj_it == adjoint.end()) continue;  // no path to the root
        const Matrix& g = adj_it->second;
        switch (node->kind) {
            case OpKind::Input:
            case OpKind::Constant:
                break;
            case OpKind::MatMul: {
                const Matrix& a = values.at(node->operands[0].get());
                const Matrix& b = values.at(node->operands[1].get());
                accumulate(adjoint[node->operands[0].get()], matmul(g, transpose(b)));
                accumulate(adjoint[node->operands[1].get()], matmul(transpose(a), g));
                break;
            }
            case OpKind::Add:
                accumulate(adjoint[node->operands[0].get()], g);
                accumulate(adjoint[node->operands[1].get()], g);
                break;
            case OpKind::Mul: {
                const Matrix& a = values.at(node->operands[0].get());
                const Matrix& b = values.at(node->operands[1].get());
                accumulate(adjoint[node->operands[0].get()], hadamard(g, b));
                accumulate(adjoint[node->operands[1].get()], hadamard(g, a));
                break;
            }
            case OpKind::ScalarMul:
                accumulate(adjoint[node->operands[0].get()], scale(g, node->attr));
                break;
            case OpKind::ConcatCols: {
                const Node* a = node->operands[0].get();
                const Node* b = node->operands[1].get();
                Matrix ga(a->rows, a->cols);
                Matrix gb(b->rows, b->cols);
                for (int i = 0; i < a->rows; ++i) {
                    for (int j = 0; j < a->cols; ++j) ga(i, j) = g(i, j);
                    for (int j = 0; j < b->cols; ++j) gb(i, j) = g(i, a->cols + j);
                }
                accumulate(adjoint[a], ga);
                accumulate(adjoint[b], gb);
                break;
            }
            case OpKind::RowMean: {
                const Node* a = node->operands[0].get();
                const double inv = 1.0 / a->rows;
                Matrix ga(a->rows, a->cols);
                for (int i = 0; i < a->rows; ++i)
                    for (int j = 0; j < a->cols; ++j) ga(i, j) = g(0, j) * inv;
                accumulate(adjoint[a], ga);
                break;
            }
            case OpKind::SoftmaxRows: {
                const Matrix& y = values.at(node);
                Matrix ga(y.rows(), y.cols());
                for (int i = 0; i < y.rows(); ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
                    for (int j = 0; j < y.cols(); ++j) ga(i, j) = y(i, j) * (g(i, j) - dot);
                }
                accumulate(adjoint[node->operands[0].get()], ga);
                break;
            }
            case OpKind::Sigmoid: {
                const Matrix& y = values.at(node);
                Matrix ga = g;
                for (std::size_t i = 0; i < ga.size(); ++i)
                    ga.data()[i] *= y.data()[i] * (1.0 - y.data()[i]);
                accumulate(adjoint[node->operands[0].get()], ga);
                break;
            }
            case OpKind::Relu: {
                const Matrix& x = values.at(node->operands[0].get());
                Matrix ga = g;
                for (std::size_t i = 0; i < ga.size(); ++i)
                    if (x.data()[i] <= 0.0) ga.data()[i] = 0.0;
                accumulate(adjoint[node->operands[0].get()], ga);
                break;
            }
            case OpKind::LeakyRelu: {
                const Matrix& x = values.at(node->operands[0].get());
                Matrix ga = g;
                for (std::size_t i = 0; i < ga.size(); ++i)
                    if (x.data()[i] <= 0.0) ga.data()[i] *= node->attr;
                accumulate(adjoint[node->operands[0].get()], ga);
                break;
            }
            case OpKind::Transpose:
                accumulate(adjoint[node->operands[0].get()], transpose(g));
                break;
            case OpKind::Sum: {
                const Node* a = node->operands[0].get();
                accumulate(adjoint[a], Matrix(a->rows, a->cols, g(0, 0)));
                break;
            }
            case OpKind::BinaryCrossEntropy: {
                const Matrix& p = values.at(node->operands[0].get());
                const Matrix& y = values.at(node->operands[1].get());
                const double gscale = g(0, 0) / static_cast<double>(p.size());
                Matrix gp(p.rows(), p.cols());
                Matrix gy(p.rows(), p.cols());
                for (std::size_t i = 0; i < p.size(); ++i) {
                    const double pi = clamp_prob(p.data()[i]);
                    gp.data()[i] = gscale * (pi - y.data()[i]) / (pi * (1.0 - pi));
                    gy.data()[i] = gscale * (std::log(1.0 - pi) - std::log(pi));
                }
                accumulate(adjoint[node->operands[0].get()], gp);
                accumulate(adjoint[node->operands[1].get()], gy);
                break;
            }
            case OpKind::CategoricalCrossEntropy: {
                const Matrix& p = values.at(node->operands[0].get());
                const Matrix& y = values.at(node->operands[1].get());
                const double gscale = g(0, 0) / static_cast<double>(p.rows());
                Matrix gp(p.rows(), p.cols());
                Matrix gy(p.rows(), p.cols());
                for (std::size_t i = 0; i < p.size(); ++i) {
                    const double pi = std::max(kProbFloor, p.data()[i]);
                    gp.data()[i] = -gscale * y.data()[i] / pi;
                    gy.data()[i] = -gscale * std::log(pi);
                }
                accumulate(adjoint[node->operands[0].get()], gp);
                accumulate(adjoint[node->operands[1].get()], gy);
                break;
            }
        }
    }

    GradientMap result;
    for (const Node* node : order) {
        if (node->kind != OpKind::Input || !node->trainable) continue;
        auto it = adjoint.find(node);
        Matrix grad =
            it != adjoint.end() ? it->second : Matrix(node->rows, node->cols, 0.0);
        auto [slot, inserted] = result.emplace(node->name, grad);
        if (!inserted) accumulate(slot->second, grad);
    }
    return result;
}

std::vector<std::string> trainable_inputs(const Expr& root) {
    std::vector<const Node*> order;
    topo_order(root, order);
    std::vector<std::string> names;
    for (const Node* node : order) {
        if (node->kind == OpKind::Input && node->trainable &&
            std::find(names.begin(), names.end(), node->name) == names.end()) {
            names.push_back(node->name);
        }
    }
    std::sort(names.begin(), names.end());
    return names;
}

double finite_difference_check(const Expr& root, const Bindings& bindings, double step) {
    if (step <= 0.0) throw std::invalid_argument("finite_difference_check: step must be > 0");
    GradientMap analytic = gradients(root, bindings);

    Bindings work = bindings;
    double worst = 0.0;
    for (const std::string& name : trainable_inputs(root)) {
        Matrix& theta = work.at(name);
        const Matrix& grad = analytic.at(name);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta.data()[i];
            theta.data()[i] = saved + step;
            const double fp = evaluate(root, work)(0, 0);
            theta.data()[i] = saved - step;
            const double fm = evaluate(root, work)(0, 0);
            theta.data()[i] = saved;
            const double numeric = (fp - fm) / (2.0 * step);
            const double a = grad.data()[i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            worst = std::max(worst, std::fabs(a - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace mogam::ad
