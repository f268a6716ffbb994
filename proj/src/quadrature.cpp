#include "mirrorshift/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "mirrorshift/errors.hpp"
#include "mirrorshift/gauss_kronrod.hpp"

namespace mirrorshift {

namespace {

struct KahanSum {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

void validate(const QuadratureSpec& spec) {
    if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0))
        throw ConfigError("quadrature tolerances must be positive");
    if (!(spec.window_lambda >= 10.0))
        throw ConfigError("window_lambda must be at least 10");
    if (spec.max_subdivisions < 1)
        throw ConfigError("max_subdivisions must be positive");
}

struct Panel {
    double lo, hi;
    double value, err;
    long long birth;
};

struct PanelWorse {
    bool operator()(const Panel& a, const Panel& b) const {
        if (a.err != b.err) return a.err < b.err;
        return a.birth > b.birth;
    }
};

Panel eval_panel(const Integrand1D& f, double lo, double hi, long long birth, long long& evals) {
    const auto& r = gk::rule15;
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 15; ++i) {
        double v = f(c + h * r.x[i]);
        k += r.wk[i] * v;
        g += r.wg[i] * v;
    }
    evals += 15;
    return Panel{lo, hi, k * h, std::abs(k - g) * h, birth};
}

/// Adaptive bisection over an initial edge list; deterministic final assembly
/// (panels sorted by position, compensated summation).
IntegralResult adaptive_1d(const Integrand1D& f, const std::vector<double>& edges,
                           const QuadratureSpec& spec) {
    IntegralResult res;
    if (edges.size() < 2) return res;

    std::priority_queue<Panel, std::vector<Panel>, PanelWorse> queue;
    long long birth = 0;
    double total_value = 0.0, total_err = 0.0;
    auto push = [&](Panel p) {
        total_value += p.value;
        total_err += p.err;
        queue.push(p);
    };

    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i + 1] > edges[i])
            push(eval_panel(f, edges[i], edges[i + 1], birth++, res.evaluations));
    }

    double width_floor = 64.0 * 1e-16 *
                         std::max({std::abs(edges.front()), std::abs(edges.back()), 1.0});
    std::vector<Panel> done;
    int splits = 0;
    while (!queue.empty()) {
        double target = std::max(spec.rel_tol * std::abs(total_value), spec.abs_tol);
        if (total_err <= target) break;
        Panel worst = queue.top();
        if (worst.hi - worst.lo <= width_floor) break;
        if (splits >= spec.max_subdivisions) {
            res.converged = false;
            break;
        }
        queue.pop();
        total_value -= worst.value;
        total_err -= worst.err;
        double mid = 0.5 * (worst.lo + worst.hi);
        push(eval_panel(f, worst.lo, mid, birth++, res.evaluations));
        push(eval_panel(f, mid, worst.hi, birth++, res.evaluations));
        ++splits;
    }
    while (!queue.empty()) {
        done.push_back(queue.top());
        queue.pop();
    }
    std::sort(done.begin(), done.end(),
              [](const Panel& a, const Panel& b) { return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi; });
    KahanSum value;
    double err = 0.0;
    for (const Panel& p : done) {
        value.add(p.value);
        err += p.err;
    }
    res.value = value.sum;
    res.error_estimate = err;
    if (!std::isfinite(err) || !std::isfinite(res.value)) res.converged = false;
    return res;
}

std::vector<double> merge_edges(double lo, double hi, std::span<const double> breakpoints) {
    std::vector<double> edges{lo, hi};
    double tol = 1e-12 * std::max({std::abs(lo), std::abs(hi), 1.0});
    for (double b : breakpoints)
        if (b > lo + tol && b < hi - tol) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [tol](double a, double b) { return std::abs(a - b) <= tol; }),
                edges.end());
    return edges;
}

/// Window edges graded geometrically toward tau, where the damping is
/// largest; adaptive refinement handles everything finer.
std::vector<double> history_edges(double tau, double a, const QuadratureSpec& spec,
                                  std::span<const double> breakpoints) {
    double window = spec.window_lambda / a;
    std::vector<double> edges{tau - window};
    for (double w = 0.5 * window; w > 0.4 / a; w *= 0.5) edges.push_back(tau - w);
    edges.push_back(tau);
    std::vector<double> merged = merge_edges(tau - window, tau, breakpoints);
    edges.insert(edges.end(), merged.begin(), merged.end());
    std::sort(edges.begin(), edges.end());
    double tol = 1e-12 * std::max(std::abs(tau), 1.0) + 1e-15 * window;
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [tol](double x, double y) { return std::abs(x - y) <= tol; }),
                edges.end());
    return edges;
}

} // namespace

IntegralResult integrate_interval(const Integrand1D& f, double lo, double hi,
                                  const QuadratureSpec& spec, std::span<const double> breakpoints) {
    validate(spec);
    if (!(hi > lo)) return {};
    return adaptive_1d(f, merge_edges(lo, hi, breakpoints), spec);
}

IntegralResult integrate_history_1d(const Integrand1D& f, double tau, double a,
                                    const QuadratureSpec& spec, double envelope_m,
                                    std::span<const double> breakpoints) {
    validate(spec);
    if (!(a > 0.0)) throw ConfigError("history integration requires a > 0");
    IntegralResult res = adaptive_1d(f, history_edges(tau, a, spec, breakpoints), spec);
    res.tail_bound = (2.0 * envelope_m / a) * std::exp(-0.5 * spec.window_lambda);
    return res;
}

namespace {

/// One-sided log-singular piece over [s0, s0 + span] (side = +1) or
/// [s0 - span, s0] (side = -1): geometric panels into the singularity plus an
/// analytic sliver for the innermost 1e-10 of the range.
void log_singular_edges(double s0, double span, int side, std::vector<double>& edges,
                        double& sliver_delta) {
    sliver_delta = 1e-10 * span;
    std::vector<double> dist{sliver_delta};
    while (dist.back() * 4.0 < span) dist.push_back(dist.back() * 4.0);
    dist.push_back(span);
    edges.clear();
    for (double d : dist) edges.push_back(s0 + side * d);
    if (side < 0) std::reverse(edges.begin(), edges.end());
}

} // namespace

IntegralResult integrate_log_singular(const Integrand1D& f_regular, double singular_at, double lo,
                                      double hi, const QuadratureSpec& spec) {
    validate(spec);
    if (!(hi > lo)) return {};
    Integrand1D weighted = [&](double s) { return f_regular(s) * std::log(std::abs(s - singular_at)); };
    bool interior = singular_at > lo && singular_at < hi;
    bool at_lo = std::abs(singular_at - lo) <= 1e-13 * std::max({std::abs(lo), std::abs(hi), 1.0});
    bool at_hi = std::abs(singular_at - hi) <= 1e-13 * std::max({std::abs(lo), std::abs(hi), 1.0});
    if (!interior && !at_lo && !at_hi) {
        // Smooth weight on the whole range.
        return adaptive_1d(weighted, {lo, hi}, spec);
    }

    IntegralResult total;
    auto accumulate = [&](const IntegralResult& part) {
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.evaluations += part.evaluations;
        total.converged = total.converged && part.converged;
    };
    auto one_sided = [&](double s0, double far_end, int side) {
        double span = side > 0 ? far_end - s0 : s0 - far_end;
        if (!(span > 0.0)) return;
        std::vector<double> edges;
        double delta;
        log_singular_edges(s0, span, side, edges, delta);
        accumulate(adaptive_1d(weighted, edges, spec));
        // Analytic sliver: int_0^delta f(s0) ln u du = f(s0)(delta ln delta - delta).
        double f0 = f_regular(s0);
        total.evaluations += 1;
        total.value += f0 * (delta * std::log(delta) - delta);
    };
    if (interior) {
        one_sided(singular_at, lo, -1);
        one_sided(singular_at, hi, +1);
    } else if (at_lo) {
        one_sided(lo, hi, +1);
    } else {
        one_sided(hi, lo, -1);
    }
    return total;
}

namespace {

enum class CellKind { Diag, Off };

struct Cell {
    double x0, x1, y0, y1;
    CellKind kind;
    double factor; // 2 for off-diagonal cells in symmetric mode, else 1
    double value, err;
    long long birth;
};

struct CellWorse {
    bool operator()(const Cell& a, const Cell& b) const {
        if (a.err != b.err) return a.err < b.err;
        return a.birth > b.birth;
    }
};

/// Tensor Gauss-Kronrod on a rectangle. For a symmetric integrand on a
/// diagonal square the node grid is shared between axes, so only i >= j is
/// evaluated and mirrored.
void eval_tensor(const Integrand2D& g, Cell& cell, bool exploit_symmetry, long long& evals) {
    const auto& r = gk::rule15;
    double cx = 0.5 * (cell.x0 + cell.x1), hx = 0.5 * (cell.x1 - cell.x0);
    double cy = 0.5 * (cell.y0 + cell.y1), hy = 0.5 * (cell.y1 - cell.y0);
    double vals[15][15];
    bool diag_square = cell.kind == CellKind::Diag && cell.x0 == cell.y0 && cell.x1 == cell.y1;
    if (exploit_symmetry && diag_square) {
        for (int i = 0; i < 15; ++i)
            for (int j = 0; j <= i; ++j) {
                vals[i][j] = g(cx + hx * r.x[i], cy + hy * r.x[j]);
                vals[j][i] = vals[i][j];
            }
        evals += 120;
    } else {
        for (int i = 0; i < 15; ++i)
            for (int j = 0; j < 15; ++j)
                vals[i][j] = g(cx + hx * r.x[i], cy + hy * r.x[j]);
        evals += 225;
    }
    double k = 0.0, gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        double rowk = 0.0, rowg = 0.0;
        for (int j = 0; j < 15; ++j) {
            rowk += r.wk[j] * vals[i][j];
            rowg += r.wg[j] * vals[i][j];
        }
        k += r.wk[i] * rowk;
        gauss += r.wg[i] * rowg;
    }
    double scale = hx * hy * cell.factor;
    cell.value = k * scale;
    cell.err = std::abs(k - gauss) * std::abs(scale);
}

/// Nested reduction of the diagonal-log double integral. With g symmetric
/// and the singular weight factored out,
///   I = int int g(t1, t2) ln((t1 - t2)^2) dt1 dt2
///     = int_0^L 4 H(u) ln(u) du,   H(u) = int_{lo}^{tau-u} g(s + u, s) ds,
/// over the window [tau - L, tau]. The outer integral is one-dimensional and
/// log-singular only at u = 0, where the graded rule applies; each H(u) is a
/// smooth adaptive integral split at the breakpoints of either argument.
IntegralResult log_diag_nested(const Integrand2D& g, double tau, double a,
                               const QuadratureSpec& spec, double envelope_m,
                               std::span<const double> breakpoints) {
    double window = spec.window_lambda / a;
    double lo = tau - window;

    QuadratureSpec inner = spec;
    inner.rel_tol = 0.1 * spec.rel_tol;
    inner.abs_tol = 0.1 * spec.abs_tol;

    long long inner_evals = 0;
    double inner_err_max = 0.0;
    bool inner_converged = true;

    auto correlation = [&](double u) {
        double hi = tau - u;
        if (!(hi > lo)) return 0.0;
        std::vector<double> cuts;
        cuts.reserve(2 * breakpoints.size());
        for (double b : breakpoints) {
            cuts.push_back(b);
            cuts.push_back(b - u);
        }
        IntegralResult h =
            integrate_interval([&](double s) { return g(s + u, s); }, lo, hi, inner, cuts);
        inner_evals += h.evaluations;
        inner_err_max = std::max(inner_err_max, h.error_estimate);
        inner_converged = inner_converged && h.converged;
        return 4.0 * h.value;
    };

    IntegralResult res = integrate_log_singular(correlation, 0.0, 0.0, window, spec);
    // Inner errors propagate through the |ln u| weight; int_0^L |ln u| du.
    double log_mass = window >= 1.0 ? window * std::log(window) - window + 2.0
                                    : window * (1.0 - std::log(window));
    res.error_estimate += 4.0 * inner_err_max * log_mass;
    res.evaluations = inner_evals;
    res.converged = res.converged && inner_converged;
    res.tail_bound = (8.0 * envelope_m / (a * a)) * std::exp(-0.5 * spec.window_lambda);
    return res;
}

} // namespace

IntegralResult integrate_history_2d(const Integrand2D& g, double tau, double a,
                                    const QuadratureSpec& spec, Integrand2DFlags flags,
                                    double envelope_m, std::span<const double> breakpoints) {
    validate(spec);
    if (!(a > 0.0)) throw ConfigError("history integration requires a > 0");
    if (flags.log_diagonal) {
        if (!flags.symmetric)
            throw ConfigError("log_diagonal integration requires a symmetric integrand");
        return log_diag_nested(g, tau, a, spec, envelope_m, breakpoints);
    }
    std::vector<double> edges = history_edges(tau, a, spec, breakpoints);

    IntegralResult res;
    std::priority_queue<Cell, std::vector<Cell>, CellWorse> queue;
    long long birth = 0;
    double total_value = 0.0, total_err = 0.0;

    auto push = [&](Cell c) {
        eval_tensor(g, c, flags.symmetric, res.evaluations);
        c.birth = birth++;
        total_value += c.value;
        total_err += c.err;
        queue.push(c);
    };

    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
            if (flags.symmetric && j > i) continue;
            CellKind kind = i == j ? CellKind::Diag : CellKind::Off;
            double factor = (flags.symmetric && kind == CellKind::Off) ? 2.0 : 1.0;
            push(Cell{edges[i], edges[i + 1], edges[j], edges[j + 1], kind, factor, 0, 0, 0});
        }
    }

    double width_floor = 64.0 * 1e-16 * std::max({std::abs(tau), spec.window_lambda / a, 1.0});
    int splits = 0;
    std::vector<Cell> done;
    while (!queue.empty()) {
        double target = std::max(spec.rel_tol * std::abs(total_value), spec.abs_tol);
        if (total_err <= target) break;
        Cell worst = queue.top();
        if (std::max(worst.x1 - worst.x0, worst.y1 - worst.y0) <= width_floor) break;
        if (splits >= spec.max_subdivisions) {
            res.converged = false;
            break;
        }
        queue.pop();
        total_value -= worst.value;
        total_err -= worst.err;
        double mx = 0.5 * (worst.x0 + worst.x1), my = 0.5 * (worst.y0 + worst.y1);
        if (worst.kind == CellKind::Diag) {
            push(Cell{worst.x0, mx, worst.y0, my, CellKind::Diag, 1.0, 0, 0, 0});
            push(Cell{mx, worst.x1, my, worst.y1, CellKind::Diag, 1.0, 0, 0, 0});
            double off_factor = flags.symmetric ? 2.0 : 1.0;
            push(Cell{mx, worst.x1, worst.y0, my, CellKind::Off, off_factor, 0, 0, 0});
            if (!flags.symmetric)
                push(Cell{worst.x0, mx, my, worst.y1, CellKind::Off, 1.0, 0, 0, 0});
        } else {
            push(Cell{worst.x0, mx, worst.y0, my, CellKind::Off, worst.factor, 0, 0, 0});
            push(Cell{mx, worst.x1, worst.y0, my, CellKind::Off, worst.factor, 0, 0, 0});
            push(Cell{worst.x0, mx, my, worst.y1, CellKind::Off, worst.factor, 0, 0, 0});
            push(Cell{mx, worst.x1, my, worst.y1, CellKind::Off, worst.factor, 0, 0, 0});
        }
        ++splits;
    }
    while (!queue.empty()) {
        done.push_back(queue.top());
        queue.pop();
    }
    std::sort(done.begin(), done.end(), [](const Cell& p, const Cell& q) {
        if (p.x0 != q.x0) return p.x0 < q.x0;
        if (p.y0 != q.y0) return p.y0 < q.y0;
        return p.x1 < q.x1;
    });
    KahanSum value;
    double err = 0.0;
    for (const Cell& c : done) {
        value.add(c.value);
        err += c.err;
    }
    res.value = value.sum;
    res.error_estimate = err;
    res.tail_bound = (8.0 * envelope_m / (a * a)) * std::exp(-0.5 * spec.window_lambda);
    return res;
}

} // namespace mirrorshift
