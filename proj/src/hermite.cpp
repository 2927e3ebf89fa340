#include "mkvlab/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace mkvlab::hermite {

namespace {
constexpr double kQuarterRoot2Pi = 0.63161877774606470;  // (2pi)^{-1/4}
}

int MultiIndex::max_entry() const {
    int m = 0;
    for (int e : k) m = std::max(m, e);
    return m;
}

double MultiIndex::bracket() const {
    double q = 0;
    for (int e : k) q += static_cast<double>(e) * e;
    return std::sqrt(1.0 + q);
}

void MultiIndex::validate() const {
    if (k.empty()) throw std::invalid_argument("MultiIndex: empty");
    for (int e : k)
        if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
}

void eval_axis(double x, std::span<double> out) {
    if (out.empty()) return;
    const int kmax = static_cast<int>(out.size()) - 1;
    if (kmax > kMaxDegree) throw std::domain_error("hermite::eval_axis: degree beyond stable range");
    const double ax = std::abs(x);
    if (ax > 53.0) {
        // exp(-x^2/4) underflows; past the classically allowed region the
        // true values are below DBL_MIN, inside it we cannot evaluate stably.
        if (2.0 * std::sqrt(static_cast<double>(kmax) + 1.0) + 8.0 >= ax)
            throw std::domain_error("hermite::eval_axis: |x| too large for stable recurrence at this degree");
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    out[0] = kQuarterRoot2Pi * std::exp(-0.25 * x * x);
    if (kmax >= 1) out[1] = x * out[0];
    for (int j = 1; j < kmax; ++j)
        out[j + 1] = (x * out[j] - std::sqrt(static_cast<double>(j)) * out[j - 1]) /
                     std::sqrt(static_cast<double>(j) + 1.0);
}

double eval(const MultiIndex& k, std::span<const double> x) {
    k.validate();
    if (static_cast<int>(x.size()) != k.dim()) throw std::invalid_argument("hermite::eval: dim mismatch");
    double prod = 1.0;
    std::vector<double> axis;
    for (int a = 0; a < k.dim(); ++a) {
        axis.assign(static_cast<std::size_t>(k.k[a]) + 1, 0.0);
        eval_axis(x[a], axis);
        prod *= axis.back();
    }
    return prod;
}

GaussLegendre GaussLegendre::on(int n, double a, double b) {
    if (n < 2) throw std::invalid_argument("GaussLegendre: n < 2");
    GaussLegendre q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton on P_n with the asymptotic initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        q.nodes[static_cast<std::size_t>(i)] = -x;
        q.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        q.weights[static_cast<std::size_t>(i)] = w;
        q.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        q.nodes[static_cast<std::size_t>(i)] = mid + hw * q.nodes[static_cast<std::size_t>(i)];
        q.weights[static_cast<std::size_t>(i)] *= hw;
    }
    return q;
}

HermiteBasis::HermiteBasis(int dim_, int max_degree_) : dim(dim_), max_degree(max_degree_) {
    if (dim < 1) throw std::invalid_argument("HermiteBasis: dim < 1");
    if (max_degree < 0 || max_degree > kMaxDegree)
        throw std::invalid_argument("HermiteBasis: max_degree out of range");
}

double HermiteBasis::eval(const MultiIndex& k, std::span<const double> x) const {
    if (k.dim() != dim) throw std::invalid_argument("HermiteBasis::eval: dim mismatch");
    if (k.max_entry() > max_degree) throw std::domain_error("HermiteBasis::eval: degree above truncation");
    return hermite::eval(k, x);
}

double HermiteBasis::sup_bound() const {
    return std::pow(2.0 * std::numbers::pi, 0.25 * dim);
}

double HermiteBasis::orthonormality_error(const Quadrature& quad, int upto) const {
    const GaussLegendre gl = GaussLegendre::on(quad.nodes, -quad.half_width, quad.half_width);
    const std::size_t nq = gl.nodes.size();
    const std::size_t nk = static_cast<std::size_t>(upto) + 1;
    std::vector<double> table(nk * nq);
    std::vector<double> axis(nk);
    for (std::size_t q = 0; q < nq; ++q) {
        eval_axis(gl.nodes[q], axis);
        for (std::size_t j = 0; j < nk; ++j) table[j * nq + q] = axis[j];
    }
    double worst = 0;
    for (std::size_t j = 0; j < nk; ++j)
        for (std::size_t l = j; l < nk; ++l) {
            double s = 0;
            for (std::size_t q = 0; q < nq; ++q) s += gl.weights[q] * table[j * nq + q] * table[l * nq + q];
            worst = std::max(worst, std::abs(s - (j == l ? 1.0 : 0.0)));
        }
    return worst;
}

CoeffVector CoeffVector::zeros(int dim, int kmax) {
    if (dim < 1 || dim > 2) throw std::invalid_argument("CoeffVector: dim must be 1 or 2");
    if (kmax < 0) throw std::invalid_argument("CoeffVector: kmax < 0");
    CoeffVector v;
    v.dim = dim;
    v.kmax = kmax;
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(kmax) + 1;
    v.c.assign(n, 0.0);
    return v;
}

std::size_t CoeffVector::flat(const MultiIndex& k) const {
    if (k.dim() != dim) throw std::invalid_argument("CoeffVector: index dim mismatch");
    std::size_t f = 0;
    for (int a = 0; a < dim; ++a) {
        if (k.k[a] < 0 || k.k[a] > kmax) throw std::out_of_range("CoeffVector: index above truncation");
        f = f * (static_cast<std::size_t>(kmax) + 1) + static_cast<std::size_t>(k.k[a]);
    }
    return f;
}

std::string CoeffVector::to_json() const {
    nlohmann::json j;
    j["d"] = dim;
    j["kmax"] = kmax;
    nlohmann::json coeffs = nlohmann::json::array();
    const std::size_t stride = static_cast<std::size_t>(kmax) + 1;
    for (std::size_t f = 0; f < c.size(); ++f) {
        std::vector<int> idx(static_cast<std::size_t>(dim));
        std::size_t rest = f;
        for (int a = dim - 1; a >= 0; --a) {
            idx[static_cast<std::size_t>(a)] = static_cast<int>(rest % stride);
            rest /= stride;
        }
        coeffs.push_back(nlohmann::json::array({idx, c[f]}));
    }
    j["coeffs"] = coeffs;
    return j.dump();
}

CoeffVector CoeffVector::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    CoeffVector v = zeros(j.at("d").get<int>(), j.at("kmax").get<int>());
    for (const auto& entry : j.at("coeffs")) {
        MultiIndex k(entry.at(0).get<std::vector<int>>());
        v.at(k) = entry.at(1).get<double>();
    }
    return v;
}

CoeffVector coeffs_of_function(const std::function<double(std::span<const double>)>& f,
                               const HermiteBasis& basis, const Quadrature& quad,
                               std::string* warning) {
    const int d = basis.dim;
    if (d > 2) throw std::invalid_argument("coeffs_of_function: dim > 2 not supported");
    const int kmax = basis.max_degree;
    const GaussLegendre gl = GaussLegendre::on(quad.nodes, -quad.half_width, quad.half_width);
    const std::size_t nq = gl.nodes.size();
    const std::size_t nk = static_cast<std::size_t>(kmax) + 1;

    std::vector<double> table(nk * nq);  // axis values, shared by both axes
    std::vector<double> axis(nk);
    for (std::size_t q = 0; q < nq; ++q) {
        eval_axis(gl.nodes[q], axis);
        for (std::size_t j = 0; j < nk; ++j) table[j * nq + q] = axis[j];
    }

    CoeffVector out = CoeffVector::zeros(d, kmax);
    double boundary = 0;
    if (d == 1) {
        std::vector<double> fw(nq);
        for (std::size_t q = 0; q < nq; ++q) {
            const double x = gl.nodes[q];
            fw[q] = gl.weights[q] * f(std::span<const double>(&x, 1));
        }
        for (std::size_t j = 0; j < nk; ++j) {
            double s = 0;
            for (std::size_t q = 0; q < nq; ++q) s += fw[q] * table[j * nq + q];
            out.c[j] = s;
        }
        const double xl = -quad.half_width, xr = quad.half_width;
        boundary = std::max(std::abs(f(std::span<const double>(&xl, 1))),
                            std::abs(f(std::span<const double>(&xr, 1))));
    } else {
        // sandwich H * F * H^T with F the weighted function samples
        std::vector<double> F(nq * nq);
        for (std::size_t q1 = 0; q1 < nq; ++q1)
            for (std::size_t q2 = 0; q2 < nq; ++q2) {
                const double xy[2] = {gl.nodes[q1], gl.nodes[q2]};
                F[q1 * nq + q2] = gl.weights[q1] * gl.weights[q2] * f(xy);
            }
        std::vector<double> tmp(nk * nq);  // H * F
        for (std::size_t j = 0; j < nk; ++j)
            for (std::size_t q2 = 0; q2 < nq; ++q2) {
                double s = 0;
                for (std::size_t q1 = 0; q1 < nq; ++q1) s += table[j * nq + q1] * F[q1 * nq + q2];
                tmp[j * nq + q2] = s;
            }
        for (std::size_t j = 0; j < nk; ++j)
            for (std::size_t l = 0; l < nk; ++l) {
                double s = 0;
                for (std::size_t q2 = 0; q2 < nq; ++q2) s += tmp[j * nq + q2] * table[l * nq + q2];
                out.c[j * nk + l] = s;
            }
        const double corners[4][2] = {{-quad.half_width, -quad.half_width},
                                      {-quad.half_width, quad.half_width},
                                      {quad.half_width, -quad.half_width},
                                      {quad.half_width, quad.half_width}};
        for (const auto& cpt : corners) boundary = std::max(boundary, std::abs(f(cpt)));
    }
    // h_k is uniformly bounded, so boundary decay of f controls the tail
    if (warning && boundary * std::pow(2.0 * std::numbers::pi, 0.25 * d) > 1e-10)
        *warning += "quadrature domain may be too small: |f| at the boundary is " +
                    format_double(boundary) + "; ";
    return out;
}

CoeffVector coeffs_of_measure(const MeasureView& mu, int dim, int kmax) {
    if (mu.dim != dim) throw std::invalid_argument("coeffs_of_measure: dim mismatch");
    if (dim > 2) throw std::invalid_argument("coeffs_of_measure: dim > 2 not supported");
    for (std::size_t i = 0; i < mu.count; ++i)
        if (mu.weight(i) < 0) throw std::invalid_argument("coeffs_of_measure: negative weight");
    const double mass = mu.total_mass();
    if (std::abs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("coeffs_of_measure: weights must sum to 1");

    CoeffVector out = CoeffVector::zeros(dim, kmax);
    const std::size_t nk = static_cast<std::size_t>(kmax) + 1;
    std::vector<double> ax(nk), ay(nk);
    for (std::size_t i = 0; i < mu.count; ++i) {
        const double w = mu.weight(i);
        const auto p = mu.point(i);
        eval_axis(p[0], ax);
        if (dim == 1) {
            for (std::size_t j = 0; j < nk; ++j) out.c[j] += w * ax[j];
        } else {
            eval_axis(p[1], ay);
            for (std::size_t j = 0; j < nk; ++j)
                for (std::size_t l = 0; l < nk; ++l) out.c[j * nk + l] += w * ax[j] * ay[l];
        }
    }
    return out;
}

double hp_norm(const CoeffVector& v, double p) {
    const std::size_t stride = static_cast<std::size_t>(v.kmax) + 1;
    double s = 0;
    for (std::size_t f = 0; f < v.c.size(); ++f) {
        std::size_t rest = f;
        double q = 0;
        for (int a = 0; a < v.dim; ++a) {
            const double e = static_cast<double>(rest % stride);
            q += e * e;
            rest /= stride;
        }
        const double br = std::sqrt(1.0 + q);
        const double t = std::pow(br, p / v.dim) * v.c[f];
        s += t * t;
    }
    return std::sqrt(s);
}

double pairing(const CoeffVector& lambda, const CoeffVector& phi) {
    if (lambda.dim != phi.dim || lambda.kmax != phi.kmax)
        throw std::invalid_argument("pairing: truncation mismatch");
    double s = 0;
    for (std::size_t f = 0; f < lambda.c.size(); ++f) s += lambda.c[f] * phi.c[f];
    return s;
}

namespace {

// D^alpha phi at x; orders beyond 2 via central differences on top of the
// exact derivatives.
double derivative(const TestFunction& phi, std::vector<int>& alpha, std::span<const double> x,
                  double h) {
    int order = 0;
    for (int e : alpha) order += e;
    const int d = phi.dim;
    if (order == 0) return phi.value(x);
    if (order == 1) {
        const auto g = phi.gradient(x);
        for (int a = 0; a < d; ++a)
            if (alpha[static_cast<std::size_t>(a)] == 1) return g[static_cast<std::size_t>(a)];
    }
    if (order == 2) {
        const auto hs = phi.hessian(x);
        int first = -1, second = -1;
        for (int a = 0; a < d; ++a) {
            if (alpha[static_cast<std::size_t>(a)] == 2) { first = second = a; break; }
            if (alpha[static_cast<std::size_t>(a)] == 1) (first < 0 ? first : second) = a;
        }
        return hs[static_cast<std::size_t>(first) * d + second];
    }
    for (int a = 0; a < d; ++a) {
        if (alpha[static_cast<std::size_t>(a)] == 0) continue;
        alpha[static_cast<std::size_t>(a)] -= 1;
        std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
        xp[static_cast<std::size_t>(a)] += h;
        xm[static_cast<std::size_t>(a)] -= h;
        const double r = (derivative(phi, alpha, xp, h) - derivative(phi, alpha, xm, h)) / (2 * h);
        alpha[static_cast<std::size_t>(a)] += 1;
        return r;
    }
    return 0;
}

void enumerate_alphas(int dim, int max_order, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(static_cast<std::size_t>(dim), 0);
    std::function<void(int, int)> rec = [&](int axis, int budget) {
        if (axis == dim) {
            out.push_back(cur);
            return;
        }
        for (int e = 0; e <= budget; ++e) {
            cur[static_cast<std::size_t>(axis)] = e;
            rec(axis + 1, budget - e);
        }
        cur[static_cast<std::size_t>(axis)] = 0;
    };
    rec(0, max_order);
}

}  // namespace

double seminorm_m_star(const TestFunction& phi, int m, const UniformGrid& probe) {
    if (m < 0) throw std::invalid_argument("seminorm_m_star: m < 0");
    probe.validate();
    if (probe.dim != phi.dim) throw std::invalid_argument("seminorm_m_star: grid/function dim mismatch");
    std::vector<std::vector<int>> alphas;
    enumerate_alphas(phi.dim, m, alphas);
    const double h = 1e-3;
    std::vector<double> x(static_cast<std::size_t>(phi.dim));
    double best = 0;
    for (std::size_t f = 0; f < probe.size(); ++f) {
        probe.point(f, x.data());
        double q = 0;
        for (double xi : x) q += xi * xi;
        const double wt = std::pow(1.0 + q, 0.5 * m);
        for (auto& alpha : alphas) {
            const double da = derivative(phi, alpha, x, h);
            best = std::max(best, wt * std::abs(da));
        }
    }
    return best;
}

}  // namespace mkvlab::hermite
