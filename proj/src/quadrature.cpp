#include "splitflow/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

namespace splitflow::quad {

namespace {

constexpr std::size_t kOrder = 15;

struct Rule {
    std::array<double, kOrder> nodes{};
    std::array<double, kOrder> weights{};
};

// Newton iteration on the Legendre recurrence.
Rule make_rule() {
    Rule rule;
    for (std::size_t i = 0; i < kOrder; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(kOrder) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= kOrder; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(kOrder) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

const Rule& rule() {
    static const Rule r = make_rule();
    return r;
}

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double zeroth = 0.0;
    double first = 0.0;
    double zeroth_error = 0.0;
    double first_error = 0.0;

    double priority() const { return zeroth_error + first_error; }
};

struct ByPriority {
    bool operator()(const Panel& l, const Panel& r) const { return l.priority() < r.priority(); }
};

class PanelEvaluator {
public:
    explicit PanelEvaluator(const BatchIntegrand& g) : g_(g), x_(3 * kOrder), y_(3 * kOrder) {}

    Panel evaluate(double a, double b) {
        const Rule& r = rule();
        const double mid = 0.5 * (a + b);
        const std::array<std::array<double, 2>, 3> spans{{{a, b}, {a, mid}, {mid, b}}};
        for (std::size_t s = 0; s < 3; ++s) {
            const double c = 0.5 * (spans[s][0] + spans[s][1]);
            const double h = 0.5 * (spans[s][1] - spans[s][0]);
            for (std::size_t i = 0; i < kOrder; ++i) x_[s * kOrder + i] = c + h * r.nodes[i];
        }
        g_(x_, y_);

        std::array<double, 3> i0{};
        std::array<double, 3> i1{};
        for (std::size_t s = 0; s < 3; ++s) {
            const double h = 0.5 * (spans[s][1] - spans[s][0]);
            double z = 0.0;
            double f = 0.0;
            for (std::size_t i = 0; i < kOrder; ++i) {
                const double wy = r.weights[i] * y_[s * kOrder + i];
                z += wy;
                f += wy * x_[s * kOrder + i];
            }
            i0[s] = h * z;
            i1[s] = h * f;
        }
        Panel p{a, b};
        p.zeroth = i0[1] + i0[2];
        p.first = i1[1] + i1[2];
        p.zeroth_error = std::abs(i0[0] - p.zeroth);
        p.first_error = std::abs(i1[0] - p.first);
        return p;
    }

private:
    const BatchIntegrand& g_;
    std::vector<double> x_;
    std::vector<double> y_;
};

}  // namespace

std::span<const double> gauss_legendre_nodes() { return rule().nodes; }
std::span<const double> gauss_legendre_weights() { return rule().weights; }

MomentIntegrals integrate_moments(const BatchIntegrand& g, double lower, double upper, double abs_tol,
                                  std::size_t max_panels, std::span<const double> breakpoints) {
    MomentIntegrals out;
    if (!(upper > lower)) {
        out.converged = true;
        return out;
    }

    std::vector<double> cuts{lower};
    for (double bp : breakpoints)
        if (bp > lower && bp < upper) cuts.push_back(bp);
    cuts.push_back(upper);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    PanelEvaluator eval(g);
    std::priority_queue<Panel, std::vector<Panel>, ByPriority> queue;
    double e0 = 0.0;
    double e1 = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Panel p = eval.evaluate(cuts[i], cuts[i + 1]);
        e0 += p.zeroth_error;
        e1 += p.first_error;
        queue.push(p);
    }

    // Errors are re-summed from the queue at the end; the running totals only steer the loop.
    while ((e0 > abs_tol || e1 > abs_tol) && queue.size() < max_panels) {
        const Panel worst = queue.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // panel cannot be split further
        queue.pop();
        const Panel left = eval.evaluate(worst.a, mid);
        const Panel right = eval.evaluate(mid, worst.b);
        e0 += left.zeroth_error + right.zeroth_error - worst.zeroth_error;
        e1 += left.first_error + right.first_error - worst.first_error;
        queue.push(left);
        queue.push(right);
    }

    // Deterministic summation order: by panel position.
    std::vector<Panel> panels;
    panels.reserve(queue.size());
    while (!queue.empty()) {
        panels.push_back(queue.top());
        queue.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
    for (const Panel& p : panels) {
        out.zeroth += p.zeroth;
        out.first += p.first;
        out.zeroth_error += p.zeroth_error;
        out.first_error += p.first_error;
    }
    out.panels = panels.size();
    out.converged = out.zeroth_error <= abs_tol && out.first_error <= abs_tol;
    return out;
}

}  // namespace splitflow::quad
