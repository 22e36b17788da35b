#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mogam/autodiff.hpp"
#include "mogam/matrix.hpp"

namespace mogam {

enum class GnnVariant { GCN, GraphSAGE, GAT };

const char* gnn_variant_name(GnnVariant v);
GnnVariant gnn_variant_from_name(const std::string& name);

// Slope of the leaky rectifier inside GAT attention scores.
inline constexpr double kGatLeakySlope = 0.2;

struct GnnOptions {
    // Weighted neighbor means (divide by the sum of incident edge weights);
    // false restores the literal |N(t)| divisor.
    bool weighted_mean = true;
    // Scale GAT messages by the edge weight instead of using edges only to
    // define the neighbor set.
    bool gat_scale_messages = false;
    int gat_heads = 1;
};

// One attention head: shared feature transform plus the scoring vector.
struct GatHeadParams {
    Matrix weight;     // in x out
    Matrix attention;  // (2 * out) x 1
};

struct GnnLayerParams {
    Matrix weight;       // W_l, neighbor branch (unused by GAT)
    Matrix self_weight;  // B_l, self branch (unused by GAT)
    std::vector<GatHeadParams> heads;  // GAT only
};

struct GnnParams {
    GnnVariant variant = GnnVariant::GCN;
    std::vector<GnnLayerParams> layers;
};

// Glorot-uniform initialized parameter stack; widths[i] is the output width
// of layer i and widths.back() is the pooled feature dimension d.
GnnParams init_gnn_params(GnnVariant variant, int input_width, const std::vector<int>& widths,
                          std::uint64_t seed, int gat_heads = 1);

// Checks symmetry and non-negativity of a co-occurrence adjacency.
void validate_adjacency(const Matrix& adj);

// Row-normalized neighbor averaging operator: diagonal removed, each row
// divided by its weight sum (or neighbor count), zero rows for isolated
// nodes. Shared by GCN and GraphSAGE.
Matrix neighbor_mean_operator(const Matrix& adj, const GnnOptions& options);

// Additive softmax mask for GAT: 0 where u is in N(t) or u == t, a large
// negative constant elsewhere.
Matrix gat_softmax_mask(const Matrix& adj);

// ---------------------------------------------------------------------------
// Differentiable expression builders. `h` is the T x in node-feature
// expression; adjacency-derived operators enter as constants.

ad::Expr gcn_layer_expr(const ad::Expr& h, const Matrix& adj, const ad::Expr& weight,
                        const ad::Expr& self_weight, const GnnOptions& options = {});

ad::Expr sage_layer_expr(const ad::Expr& h, const Matrix& adj, const ad::Expr& weight,
                         const ad::Expr& self_weight, const GnnOptions& options = {});

// Heads are mean-combined before the output nonlinearity. When
// `attention_out` is non-null it receives each head's T x T attention
// matrix expression.
ad::Expr gat_layer_expr(const ad::Expr& h, const Matrix& adj,
                        const std::vector<std::pair<ad::Expr, ad::Expr>>& heads,
                        const GnnOptions& options = {},
                        std::vector<ad::Expr>* attention_out = nullptr);

ad::Expr global_mean_pool_expr(const ad::Expr& h);

// Full encoder: layers applied to `features`, then pooled to 1 x d.
// `params` supplies parameter expressions per layer (input or constant
// nodes, at the caller's choice).
struct GnnLayerExprs {
    ad::Expr weight;
    ad::Expr self_weight;
    std::vector<std::pair<ad::Expr, ad::Expr>> heads;  // (weight, attention)
};

ad::Expr encode_graph_expr(const ad::Expr& features, const Matrix& adj, GnnVariant variant,
                           const std::vector<GnnLayerExprs>& params,
                           const GnnOptions& options = {},
                           std::vector<ad::Expr>* attention_out = nullptr);

// ---------------------------------------------------------------------------
// Plain matrix front-ends (build the expression, evaluate, return the value).

Matrix gcn_layer(const Matrix& h, const Matrix& adj, const GnnLayerParams& params,
                 const GnnOptions& options = {});
Matrix sage_layer(const Matrix& h, const Matrix& adj, const GnnLayerParams& params,
                  const GnnOptions& options = {});
Matrix gat_layer(const Matrix& h, const Matrix& adj, const GnnLayerParams& params,
                 const GnnOptions& options = {});
// Attention matrix of the first head, rows = target nodes.
Matrix gat_attention(const Matrix& h, const Matrix& adj, const GnnLayerParams& params,
                     const GnnOptions& options = {});
Matrix global_mean_pool(const Matrix& h);
Matrix encode_graph(const Matrix& adj, const Matrix& features, const GnnParams& params,
                    const GnnOptions& options = {});

}  // namespace mogam
