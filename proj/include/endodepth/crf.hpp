// Continuous Gaussian conditional random field over superpixel depths.
// Quadratic energy E(y) = -Σ(y_i-h_i)^2 - Σ_edges Σ_k β_k S^k (y_i-y_j)^2,
// so the conditional density is a Gaussian with precision A = I + D - W.
// MAP inference, the exact negative log-likelihood (analytic partition
// function), and its gradients in h and β are all closed-form.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/superpixels.hpp"

namespace endo {

struct CrfParams {
    std::vector<double> beta = std::vector<double>(kSimilarityKinds, 1.0);
    double lambda_theta = 1e-3;  // strength of the ||theta||^2 regularizer
    double lambda_beta = 1e-3;   // strength of the ||beta||^2 regularizer
};

inline void validate_crf_params(const CrfParams& p) {
    if (p.beta.empty()) throw ParameterError("beta must be non-empty");
    for (double b : p.beta) {
        if (!std::isfinite(b) || b < 0.0)
            throw ParameterError("beta entries must be finite and >= 0");
    }
    if (p.lambda_theta < 0.0 || p.lambda_beta < 0.0)
        throw ParameterError("regularizer strengths must be >= 0");
}

struct CrfEdge {
    int i = 0, j = 0;  // i < j, unordered edge stored once at full weight
    std::array<double, kSimilarityKinds> s{};
};

struct CrfGraph {
    int p = 0;  // node count
    std::vector<CrfEdge> edges;
};

inline void validate_graph(const CrfGraph& g) {
    if (g.p < 1) throw ShapeError("graph must have at least one node");
    for (const auto& e : g.edges) {
        if (e.i < 0 || e.j < 0 || e.i >= g.p || e.j >= g.p || e.i == e.j)
            throw ShapeError("edge endpoints out of range");
        for (double s : e.s)
            if (!std::isfinite(s) || s < 0.0)
                throw ShapeError("edge similarities must be finite and >= 0");
    }
}

inline CrfGraph make_crf_graph(const SuperpixelGraph& g) {
    CrfGraph out;
    out.p = static_cast<int>(g.nodes.size());
    out.edges.reserve(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        CrfEdge ce;
        ce.i = g.edges[e].first;
        ce.j = g.edges[e].second;
        for (int k = 0; k < kSimilarityKinds; ++k)
            ce.s[static_cast<std::size_t>(k)] = g.similarity(k, static_cast<int>(e));
        out.edges.push_back(ce);
    }
    return out;
}

// Restriction of the graph to the nodes where keep[i] != 0. Kept nodes are
// renumbered in increasing original order; `kept` reports the original index
// of each new node. Edges with a dropped endpoint disappear.
inline CrfGraph subgraph(const CrfGraph& g, std::span<const std::uint8_t> keep,
                         std::vector<int>& kept) {
    if (static_cast<int>(keep.size()) != g.p)
        throw ShapeError("keep mask length must equal node count");
    std::vector<int> remap(static_cast<std::size_t>(g.p), -1);
    kept.clear();
    for (int i = 0; i < g.p; ++i)
        if (keep[static_cast<std::size_t>(i)]) {
            remap[static_cast<std::size_t>(i)] = static_cast<int>(kept.size());
            kept.push_back(i);
        }
    CrfGraph out;
    out.p = static_cast<int>(kept.size());
    for (const auto& e : g.edges) {
        int ni = remap[static_cast<std::size_t>(e.i)];
        int nj = remap[static_cast<std::size_t>(e.j)];
        if (ni < 0 || nj < 0) continue;
        CrfEdge ce = e;
        ce.i = std::min(ni, nj);
        ce.j = std::max(ni, nj);
        out.edges.push_back(ce);
    }
    return out;
}

namespace detail {

inline void check_beta(const CrfGraph& g, std::span<const double> beta) {
    validate_graph(g);
    if (beta.size() != kSimilarityKinds)
        throw ShapeError("beta length must equal the number of similarity kinds");
    for (double b : beta)
        if (!std::isfinite(b) || b < 0.0)
            throw ParameterError("beta entries must be finite and >= 0");
}

inline double edge_weight(const CrfEdge& e, std::span<const double> beta) {
    double w = 0.0;
    for (std::size_t k = 0; k < kSimilarityKinds; ++k) w += beta[k] * e.s[k];
    return w;
}

// A = I + D - W: identity plus the weighted graph Laplacian.
inline Eigen::MatrixXd assemble_precision(const CrfGraph& g,
                                          std::span<const double> beta) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(g.p, g.p);
    for (const auto& e : g.edges) {
        double w = edge_weight(e, beta);
        A(e.i, e.i) += w;
        A(e.j, e.j) += w;
        A(e.i, e.j) -= w;
        A(e.j, e.i) -= w;
    }
    return A;
}

// y' = A y without forming A (for conjugate-gradient solves on large graphs).
inline void apply_precision(const CrfGraph& g, const std::vector<double>& ew,
                            const double* y, double* out) {
    for (int i = 0; i < g.p; ++i) out[i] = y[i];
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        double w = ew[e];
        double d = w * (y[g.edges[e].i] - y[g.edges[e].j]);
        out[g.edges[e].i] += d;
        out[g.edges[e].j] -= d;
    }
}

// Pairwise quadratic form q_k(v) = Σ_edges S^k (v_i - v_j)^2 per kind.
inline std::array<double, kSimilarityKinds> pairwise_quadratic(
    const CrfGraph& g, std::span<const double> v) {
    std::array<double, kSimilarityKinds> q{};
    for (const auto& e : g.edges) {
        double d = v[static_cast<std::size_t>(e.i)] - v[static_cast<std::size_t>(e.j)];
        double d2 = d * d;
        for (std::size_t k = 0; k < kSimilarityKinds; ++k) q[k] += e.s[k] * d2;
    }
    return q;
}

}  // namespace detail

// E(y) = -Σ_i (y_i - h_i)^2 - Σ_edges Σ_k β_k S^k (y_i - y_j)^2.
// Unordered edges enter once at full weight.
inline double energy(std::span<const double> y, std::span<const double> h,
                     const CrfGraph& g, std::span<const double> beta) {
    detail::check_beta(g, beta);
    if (static_cast<int>(y.size()) != g.p || static_cast<int>(h.size()) != g.p)
        throw ShapeError("y and h must have one entry per node");
    double unary = 0.0;
    for (int i = 0; i < g.p; ++i) {
        double d = y[static_cast<std::size_t>(i)] - h[static_cast<std::size_t>(i)];
        unary += d * d;
    }
    double pair = 0.0;
    for (const auto& e : g.edges) {
        double d = y[static_cast<std::size_t>(e.i)] - y[static_cast<std::size_t>(e.j)];
        pair += detail::edge_weight(e, beta) * d * d;
    }
    return -unary - pair;
}

// MAP depth assignment: the unique solution of A y = h. Direct factorization
// for small systems, conjugate gradient (relative residual <= 1e-8) for
// large ones.
inline std::vector<double> map_infer(std::span<const double> h, const CrfGraph& g,
                                     std::span<const double> beta) {
    detail::check_beta(g, beta);
    if (static_cast<int>(h.size()) != g.p)
        throw ShapeError("h must have one entry per node");
    for (double v : h)
        if (!std::isfinite(v)) throw ParameterError("non-finite unary input");

    if (g.p <= 512) {
        Eigen::MatrixXd A = detail::assemble_precision(g, beta);
        Eigen::Map<const Eigen::VectorXd> hv(h.data(), g.p);
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success)
            throw Error("precision matrix factorization failed");
        Eigen::VectorXd y = llt.solve(hv);
        return std::vector<double>(y.data(), y.data() + g.p);
    }

    std::vector<double> ew(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        ew[e] = detail::edge_weight(g.edges[e], beta);
    std::size_t n = static_cast<std::size_t>(g.p);
    std::vector<double> y(n, 0.0), r(h.begin(), h.end()), p(r), Ap(n);
    double hnorm = 0.0;
    for (double v : h) hnorm += v * v;
    hnorm = std::sqrt(hnorm);
    if (hnorm == 0.0) return y;
    double rs = 0.0;
    for (double v : r) rs += v * v;
    double tol = 1e-8 * hnorm;
    for (int it = 0; it < 4 * g.p && std::sqrt(rs) > tol; ++it) {
        detail::apply_precision(g, ew, p.data(), Ap.data());
        double pAp = 0.0;
        for (std::size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        double alpha = rs / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rs2 = 0.0;
        for (double v : r) rs2 += v * v;
        double bta = rs2 / rs;
        rs = rs2;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + bta * p[i];
    }
    return y;
}

// Exact negative log-likelihood of the Gaussian conditional:
//   nll = yᵀAy - 2hᵀy + hᵀA⁻¹h + (p/2)·log π - ½·log det A.
inline double nll(std::span<const double> y, std::span<const double> h,
                  const CrfGraph& g, std::span<const double> beta) {
    detail::check_beta(g, beta);
    if (static_cast<int>(y.size()) != g.p || static_cast<int>(h.size()) != g.p)
        throw ShapeError("y and h must have one entry per node");
    Eigen::MatrixXd A = detail::assemble_precision(g, beta);
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), g.p);
    Eigen::Map<const Eigen::VectorXd> hv(h.data(), g.p);
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw Error("precision matrix factorization failed");
    double logdet = 0.0;
    const auto& L = llt.matrixLLT();
    for (int i = 0; i < g.p; ++i) logdet += 2.0 * std::log(L(i, i));
    Eigen::VectorXd z = llt.solve(hv);
    return yv.dot(A * yv) - 2.0 * hv.dot(yv) + hv.dot(z) +
           0.5 * g.p * std::log(kPi) - 0.5 * logdet;
}

struct NllGrad {
    std::vector<double> dh;     // per node
    std::vector<double> dbeta;  // per similarity kind
};

// Analytic gradients of nll:
//   dNLL/dh    = -2y + 2 A⁻¹ h
//   dNLL/dβ_k  = q_k(y) - q_k(z) - ½ tr(A⁻¹ L_k),  z = A⁻¹ h,
// where q_k is the pairwise quadratic form of kind k and
// tr(A⁻¹L_k) = Σ_edges S^k (M_ii + M_jj - 2 M_ij) with M = A⁻¹.
inline NllGrad nll_grad(std::span<const double> y, std::span<const double> h,
                        const CrfGraph& g, std::span<const double> beta) {
    detail::check_beta(g, beta);
    if (static_cast<int>(y.size()) != g.p || static_cast<int>(h.size()) != g.p)
        throw ShapeError("y and h must have one entry per node");
    Eigen::MatrixXd A = detail::assemble_precision(g, beta);
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), g.p);
    Eigen::Map<const Eigen::VectorXd> hv(h.data(), g.p);
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw Error("precision matrix factorization failed");
    Eigen::VectorXd z = llt.solve(hv);
    Eigen::MatrixXd M = llt.solve(Eigen::MatrixXd::Identity(g.p, g.p));

    NllGrad out;
    out.dh.resize(static_cast<std::size_t>(g.p));
    for (int i = 0; i < g.p; ++i)
        out.dh[static_cast<std::size_t>(i)] = -2.0 * yv(i) + 2.0 * z(i);

    auto qy = detail::pairwise_quadratic(g, y);
    std::vector<double> zs(z.data(), z.data() + g.p);
    auto qz = detail::pairwise_quadratic(g, zs);
    std::array<double, kSimilarityKinds> tr{};
    for (const auto& e : g.edges) {
        double m = M(e.i, e.i) + M(e.j, e.j) - 2.0 * M(e.i, e.j);
        for (std::size_t k = 0; k < kSimilarityKinds; ++k) tr[k] += e.s[k] * m;
    }
    out.dbeta.resize(kSimilarityKinds);
    for (std::size_t k = 0; k < kSimilarityKinds; ++k)
        out.dbeta[k] = qy[k] - qz[k] - 0.5 * tr[k];
    return out;
}

struct CrfInstance {
    std::vector<double> y;  // pooled ground-truth depths per node
    std::vector<double> h;  // unary outputs per node
    CrfGraph graph;
};

// Regularized training objective:
//   Σ_images nll + (λ_θ/2)·‖θ‖² + (λ_β/2)·‖β‖².
// theta_sq_norm is the squared parameter norm of the unary network.
inline double objective(const std::vector<CrfInstance>& batch,
                        double theta_sq_norm, std::span<const double> beta,
                        double lambda_theta, double lambda_beta) {
    double total = 0.0;
    for (const auto& inst : batch)
        total += nll(inst.y, inst.h, inst.graph, beta);
    double b2 = 0.0;
    for (double b : beta) b2 += b * b;
    return total + 0.5 * lambda_theta * theta_sq_norm + 0.5 * lambda_beta * b2;
}

}  // namespace endo
