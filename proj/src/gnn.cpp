#include "mogam/gnn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mogam {

namespace {

// Large enough that exp(mask - rowmax) underflows to exactly zero.
constexpr double kMaskedScore = -1e30;

Matrix glorot_uniform(int rows, int cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

}  // namespace

const char* gnn_variant_name(GnnVariant v) {
    switch (v) {
        case GnnVariant::GCN: return "gcn";
        case GnnVariant::GraphSAGE: return "graphsage";
        case GnnVariant::GAT: return "gat";
    }
    return "unknown";
}

GnnVariant gnn_variant_from_name(const std::string& name) {
    if (name == "gcn") return GnnVariant::GCN;
    if (name == "graphsage" || name == "sage") return GnnVariant::GraphSAGE;
    if (name == "gat") return GnnVariant::GAT;
    throw std::invalid_argument("unknown GNN variant '" + name +
                                "' (expected gcn, graphsage or gat)");
}

GnnParams init_gnn_params(GnnVariant variant, int input_width, const std::vector<int>& widths,
                          std::uint64_t seed, int gat_heads) {
    if (widths.empty()) throw std::invalid_argument("init_gnn_params: need at least one layer");
    if (gat_heads < 1) throw std::invalid_argument("init_gnn_params: gat_heads must be >= 1");
    std::mt19937_64 rng(seed);
    GnnParams params;
    params.variant = variant;
    int in = input_width;
    for (int out : widths) {
        if (out < 1) throw std::invalid_argument("init_gnn_params: widths must be positive");
        GnnLayerParams layer;
        switch (variant) {
            case GnnVariant::GCN:
                layer.weight = glorot_uniform(in, out, rng);
                layer.self_weight = glorot_uniform(in, out, rng);
                break;
            case GnnVariant::GraphSAGE:
                if (out % 2 != 0) {
                    throw std::invalid_argument(
                        "graphsage: output width must be even to split between the "
                        "neighbor and self branches, got " +
                        std::to_string(out));
                }
                layer.weight = glorot_uniform(in, out / 2, rng);
                layer.self_weight = glorot_uniform(in, out / 2, rng);
                break;
            case GnnVariant::GAT:
                for (int h = 0; h < gat_heads; ++h) {
                    GatHeadParams head;
                    head.weight = glorot_uniform(in, out, rng);
                    head.attention = glorot_uniform(2 * out, 1, rng);
                    layer.heads.push_back(std::move(head));
                }
                break;
        }
        params.layers.push_back(std::move(layer));
        in = out;
    }
    return params;
}

void validate_adjacency(const Matrix& adj) {
    if (adj.rows() != adj.cols()) {
        throw std::invalid_argument("adjacency must be square, got " + adj.shape_str());
    }
    for (int i = 0; i < adj.rows(); ++i) {
        for (int j = 0; j < adj.cols(); ++j) {
            if (adj(i, j) < 0.0) {
                throw std::invalid_argument("adjacency has a negative entry at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
            if (adj(i, j) != adj(j, i)) {
                throw std::invalid_argument("adjacency is not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
}

Matrix neighbor_mean_operator(const Matrix& adj, const GnnOptions& options) {
    validate_adjacency(adj);
    const int t = adj.rows();
    Matrix op(t, t, 0.0);
    for (int i = 0; i < t; ++i) {
        double denom = 0.0;
        for (int j = 0; j < t; ++j) {
            if (j == i) continue;  // N(t) excludes the node itself
            if (adj(i, j) > 0.0) denom += options.weighted_mean ? adj(i, j) : 1.0;
        }
        if (denom == 0.0) continue;  // isolated node: zero neighbor term
        for (int j = 0; j < t; ++j) {
            if (j == i || adj(i, j) <= 0.0) continue;
            op(i, j) = (options.weighted_mean ? adj(i, j) : 1.0) / denom;
        }
    }
    return op;
}

Matrix gat_softmax_mask(const Matrix& adj) {
    validate_adjacency(adj);
    const int t = adj.rows();
    Matrix mask(t, t, kMaskedScore);
    for (int i = 0; i < t; ++i) {
        mask(i, i) = 0.0;  // the softmax set always contains the node itself
        for (int j = 0; j < t; ++j) {
            if (j != i && adj(i, j) > 0.0) mask(i, j) = 0.0;
        }
    }
    return mask;
}

ad::Expr gcn_layer_expr(const ad::Expr& h, const Matrix& adj, const ad::Expr& weight,
                        const ad::Expr& self_weight, const GnnOptions& options) {
    auto mean_op = ad::constant(neighbor_mean_operator(adj, options));
    auto neighbor = ad::matmul(ad::matmul(mean_op, h), weight);
    auto self = ad::matmul(h, self_weight);
    return ad::relu(ad::add(neighbor, self));
}

ad::Expr sage_layer_expr(const ad::Expr& h, const Matrix& adj, const ad::Expr& weight,
                         const ad::Expr& self_weight, const GnnOptions& options) {
    if (weight->cols != self_weight->cols) {
        throw std::invalid_argument("graphsage: neighbor and self branches must be equal width");
    }
    auto mean_op = ad::constant(neighbor_mean_operator(adj, options));
    auto neighbor = ad::matmul(ad::matmul(mean_op, h), weight);
    auto self = ad::matmul(h, self_weight);
    return ad::relu(ad::concat_cols(neighbor, self));
}

ad::Expr gat_layer_expr(const ad::Expr& h, const Matrix& adj,
                        const std::vector<std::pair<ad::Expr, ad::Expr>>& heads,
                        const GnnOptions& options, std::vector<ad::Expr>* attention_out) {
    if (heads.empty()) throw std::invalid_argument("gat: need at least one attention head");
    const int t = adj.rows();
    auto mask = ad::constant(gat_softmax_mask(adj));

    // Optional edge-weight scaling of messages; the self message keeps
    // weight 1 since the diagonal of a co-occurrence matrix may be zero.
    ad::Expr message_weights;
    if (options.gat_scale_messages) {
        Matrix w = adj;
        for (int i = 0; i < t; ++i) w(i, i) = 1.0;
        message_weights = ad::constant(w);
    }

    auto ones_row = ad::constant(Matrix::ones(1, t));
    auto ones_col = ad::constant(Matrix::ones(t, 1));

    ad::Expr combined;
    for (const auto& [weight, attention] : heads) {
        const int out = weight->cols;
        if (attention->rows != 2 * out || attention->cols != 1) {
            throw std::invalid_argument(
                "gat: attention vector must be (2 * out) x 1, out = " + std::to_string(out));
        }
        // Split the scoring vector into target and source halves with
        // constant selector matrices; e(t,u) = a1' W h_t + a2' W h_u.
        Matrix sel_target(out, 2 * out, 0.0);
        Matrix sel_source(out, 2 * out, 0.0);
        for (int i = 0; i < out; ++i) {
            sel_target(i, i) = 1.0;
            sel_source(i, out + i) = 1.0;
        }
        auto transformed = ad::matmul(h, weight);  // T x out
        auto target_score =
            ad::matmul(transformed, ad::matmul(ad::constant(sel_target), attention));  // T x 1
        auto source_score =
            ad::matmul(transformed, ad::matmul(ad::constant(sel_source), attention));  // T x 1
        auto scores = ad::leaky_relu(
            ad::add(ad::matmul(target_score, ones_row),
                    ad::matmul(ones_col, ad::transpose(source_score))),
            kGatLeakySlope);
        auto alpha = ad::softmax_rows(ad::add(scores, mask));
        if (attention_out) attention_out->push_back(alpha);
        if (message_weights) alpha = ad::mul(alpha, message_weights);
        auto head_out = ad::matmul(alpha, transformed);
        combined = combined ? ad::add(combined, head_out) : head_out;
    }
    if (heads.size() > 1) {
        combined = ad::scalar_mul(combined, 1.0 / static_cast<double>(heads.size()));
    }
    return ad::relu(combined);
}

ad::Expr global_mean_pool_expr(const ad::Expr& h) { return ad::row_mean(h); }

ad::Expr encode_graph_expr(const ad::Expr& features, const Matrix& adj, GnnVariant variant,
                           const std::vector<GnnLayerExprs>& params, const GnnOptions& options,
                           std::vector<ad::Expr>* attention_out) {
    if (params.empty()) throw std::invalid_argument("encode_graph: need at least one layer");
    ad::Expr h = features;
    for (const GnnLayerExprs& layer : params) {
        switch (variant) {
            case GnnVariant::GCN:
                h = gcn_layer_expr(h, adj, layer.weight, layer.self_weight, options);
                break;
            case GnnVariant::GraphSAGE:
                h = sage_layer_expr(h, adj, layer.weight, layer.self_weight, options);
                break;
            case GnnVariant::GAT:
                h = gat_layer_expr(h, adj, layer.heads, options, attention_out);
                break;
        }
    }
    return global_mean_pool_expr(h);
}

// ---------------------------------------------------------------------------
// Matrix front-ends

namespace {

ad::Expr feature_input(const Matrix& h) {
    return ad::input("h", h.rows(), h.cols(), /*trainable=*/false);
}

GnnLayerExprs layer_exprs_from_params(const GnnLayerParams& params, GnnVariant variant) {
    GnnLayerExprs e;
    if (variant == GnnVariant::GAT) {
        if (params.heads.empty()) {
            throw std::invalid_argument("gat: layer params carry no attention heads");
        }
        for (const GatHeadParams& head : params.heads) {
            e.heads.emplace_back(ad::constant(head.weight), ad::constant(head.attention));
        }
    } else {
        e.weight = ad::constant(params.weight);
        e.self_weight = ad::constant(params.self_weight);
    }
    return e;
}

}  // namespace

Matrix gcn_layer(const Matrix& h, const Matrix& adj, const GnnLayerParams& params,
                 const GnnOptions& options) {
    auto hx = feature_input(h);
    auto expr = gcn_layer_expr(hx, adj, ad::constant(params.weight),
                               ad::constant(params.self_weight), options);
    return ad::evaluate(expr, {{"h", h}});
}

Matrix sage_layer(const Matrix& h, const Matrix& adj, const GnnLayerParams& params,
                  const GnnOptions& options) {
    auto hx = feature_input(h);
    auto expr = sage_layer_expr(hx, adj, ad::constant(params.weight),
                                ad::constant(params.self_weight), options);
    return ad::evaluate(expr, {{"h", h}});
}

Matrix gat_layer(const Matrix& h, const Matrix& adj, const GnnLayerParams& params,
                 const GnnOptions& options) {
    auto hx = feature_input(h);
    auto layer = layer_exprs_from_params(params, GnnVariant::GAT);
    auto expr = gat_layer_expr(hx, adj, layer.heads, options);
    return ad::evaluate(expr, {{"h", h}});
}

Matrix gat_attention(const Matrix& h, const Matrix& adj, const GnnLayerParams& params,
                     const GnnOptions& options) {
    auto hx = feature_input(h);
    auto layer = layer_exprs_from_params(params, GnnVariant::GAT);
    std::vector<ad::Expr> attention;
    gat_layer_expr(hx, adj, layer.heads, options, &attention);
    return ad::evaluate(attention.front(), {{"h", h}});
}

Matrix global_mean_pool(const Matrix& h) {
    if (h.rows() < 1) throw std::invalid_argument("global_mean_pool: no nodes to pool");
    auto hx = feature_input(h);
    return ad::evaluate(global_mean_pool_expr(hx), {{"h", h}});
}

Matrix encode_graph(const Matrix& adj, const Matrix& features, const GnnParams& params,
                    const GnnOptions& options) {
    auto hx = feature_input(features);
    std::vector<GnnLayerExprs> layers;
    layers.reserve(params.layers.size());
    for (const GnnLayerParams& layer : params.layers) {
        layers.push_back(layer_exprs_from_params(layer, params.variant));
    }
    auto expr = encode_graph_expr(hx, adj, params.variant, layers, options);
    return ad::evaluate(expr, {{"h", features}});
}

}  // namespace mogam
