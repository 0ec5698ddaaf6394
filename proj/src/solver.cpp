#include "fairprice/solver.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace fairprice {

namespace {

constexpr double kPerfectDiscriminationMargin = 1e-9;
// Smallest shifted lower price, as a fraction of the effective support, that
// the ratio solve is asked to resolve.
constexpr double kPriceFloorFraction = 1e-9;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(15);
    os << x;
    return os.str();
}

struct Stationary {
    double x;
    double residual;
    bool unique;
};

// First sign change of g to the right of 0, refined by the root finder.
// g(0) > 0 for every first-order condition solved here.
Stationary first_stationary_point(const numerics::ScalarFn& g, double hi, bool can_expand,
                                  const SolverConfig& cfg) {
    double lo = 0.0;
    double g_lo = g(lo);
    if (!(g_lo > 0.0)) {
        throw Error(ErrorKind::Regularity,
                    "first-order condition is not positive at zero price: " + fmt(g_lo));
    }
    const int cells = std::max(cfg.scan_cells, 2);
    for (int expansion = 0; expansion < 64; ++expansion) {
        double prev_x = lo;
        double prev_g = g_lo;
        std::optional<numerics::Bracket> first;
        int sign_changes = 0;
        for (int i = 1; i <= cells; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / cells;
            const double gx = g(x);
            if (std::isnan(gx)) {
                throw Error(ErrorKind::Regularity, "first-order condition is NaN at " + fmt(x));
            }
            if ((gx > 0.0) != (prev_g > 0.0)) {
                ++sign_changes;
                if (!first) first = numerics::Bracket{prev_x, x};
            }
            prev_x = x;
            prev_g = gx;
        }
        if (first) {
            const double root = numerics::find_root_monotone(g, *first, cfg.root);
            return {root, g(root), sign_changes == 1};
        }
        if (!can_expand) break;
        lo = hi;
        g_lo = prev_g;
        hi *= 2.0;
    }
    throw Error(ErrorKind::Regularity,
                "first-order condition has no sign change; the demand model is not regular enough");
}

struct Shifted {
    DemandModel model;
    double span;  // effective support length above cost
    bool bounded;
};

Shifted prepare(const DemandModel& model, double cost, const SolverConfig& cfg) {
    if (!(cost >= 0.0) || !std::isfinite(cost)) {
        throw Error(ErrorKind::Domain, "marginal cost must be finite and non-negative");
    }
    if (!model.finite_mean()) {
        throw Error(ErrorKind::Divergence, model.describe() + ": mean is not finite");
    }
    const double span = effective_upper(model, cfg.tail_mass) - cost;
    if (!(span > 0.0)) {
        throw Error(ErrorKind::PolicyRange, "marginal cost " + fmt(cost) +
                                                " lies beyond the effective support");
    }
    return {cost_shift(model, cost), span, model.support().bounded()};
}

Stationary difference_root(const Shifted& s, double epsilon, const SolverConfig& cfg) {
    const DemandModel& m = s.model;
    const auto g = [&m, epsilon](double p) { return m.survival(p + epsilon) - p * m.pdf(p); };
    return first_stationary_point(g, s.span - epsilon, !s.bounded, cfg);
}

Stationary ratio_root(const Shifted& s, double gamma, const SolverConfig& cfg) {
    const DemandModel& m = s.model;
    const auto h = [&m, gamma](double q) { return gamma * m.survival(gamma * q) - q * m.pdf(q); };
    // Pad past span/gamma so rounding in gamma*q cannot leave h positive at the bracket end.
    const double hi = std::min(s.span, s.span / gamma * (1.0 + 1e-6));
    return first_stationary_point(h, hi, !s.bounded, cfg);
}

Solution assemble(const DemandModel& model, Policy policy, PriceBand band, double cost,
                  const Stationary& st, const SolverConfig& cfg) {
    band.upper = std::min(band.upper, model.support().upper);
    Solution sol{policy, band, welfare_report(model, band, cost, cfg.quad), st.residual, true,
                 st.unique, {}};
    if (!st.unique) {
        sol.warnings.push_back(
            "first-order condition changes sign more than once; using the first stationary point");
    }
    return sol;
}

Solution perfect_discrimination(const DemandModel& model, Policy policy, double cost,
                                double upper_price, const SolverConfig& cfg) {
    const double eff = efficient_trade_surplus(model, cost, cfg.quad);
    const PriceBand band{cost, std::min(upper_price, model.support().upper)};
    Solution sol{policy, band, WelfareReport{band, cost, eff, 0.0, eff}, 0.0, false, true, {}};
    sol.warnings.push_back("perfect-discrimination limit reported analytically");
    return sol;
}

}  // namespace

PolicyKind kind_of(const Policy& policy) noexcept {
    return std::holds_alternative<Difference>(policy) ? PolicyKind::Difference : PolicyKind::Ratio;
}

double parameter_of(const Policy& policy) noexcept {
    if (const auto* d = std::get_if<Difference>(&policy)) return d->epsilon;
    return std::get<Ratio>(policy).gamma;
}

Policy make_policy(PolicyKind kind, double parameter) {
    if (kind == PolicyKind::Difference) return Difference{parameter};
    return Ratio{parameter};
}

const char* to_string(PolicyKind kind) noexcept {
    return kind == PolicyKind::Difference ? "diff" : "ratio";
}

double max_difference(const DemandModel& model, double cost, const SolverConfig& cfg) {
    return (1.0 - kPerfectDiscriminationMargin) * (effective_upper(model, cfg.tail_mass) - cost);
}

double max_ratio(const DemandModel&, double, const SolverConfig&) {
    return 1.0 / kPriceFloorFraction;
}

Solution solve_uniform_price(const DemandModel& model, double cost, const SolverConfig& cfg) {
    const Shifted s = prepare(model, cost, cfg);
    const Stationary st = difference_root(s, 0.0, cfg);
    return assemble(model, Difference{0.0}, PriceBand{st.x + cost, st.x + cost}, cost, st, cfg);
}

Solution solve_difference(const DemandModel& model, double epsilon, double cost,
                          const SolverConfig& cfg) {
    const Shifted s = prepare(model, cost, cfg);
    if (!(epsilon >= 0.0) || !(epsilon < s.span)) {
        throw Error(ErrorKind::PolicyRange, "epsilon=" + fmt(epsilon) + " outside [0, " +
                                                fmt(s.span) + ")");
    }
    if (epsilon > max_difference(model, cost, cfg)) {
        return perfect_discrimination(model, Difference{epsilon}, cost, cost + epsilon, cfg);
    }
    const Stationary st = difference_root(s, epsilon, cfg);
    return assemble(model, Difference{epsilon}, PriceBand{st.x + cost, st.x + epsilon + cost},
                    cost, st, cfg);
}

Solution solve_ratio(const DemandModel& model, double gamma, double cost, const SolverConfig& cfg) {
    const Shifted s = prepare(model, cost, cfg);
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
        throw Error(ErrorKind::PolicyRange, "gamma=" + fmt(gamma) + " must be finite and >= 1");
    }
    if (gamma > max_ratio(model, cost, cfg)) {
        return perfect_discrimination(model, Ratio{gamma}, cost, cost + s.span, cfg);
    }
    const Stationary st = ratio_root(s, gamma, cfg);
    return assemble(model, Ratio{gamma}, PriceBand{st.x + cost, gamma * st.x + cost}, cost, st,
                    cfg);
}

Solution solve(const DemandModel& model, const Policy& policy, double cost,
               const SolverConfig& cfg) {
    if (const auto* d = std::get_if<Difference>(&policy)) {
        return solve_difference(model, d->epsilon, cost, cfg);
    }
    return solve_ratio(model, std::get<Ratio>(policy).gamma, cost, cfg);
}

double epsilon_threshold(const DemandModel& model, double cost, const SolverConfig& cfg) {
    const Shifted s = prepare(model, cost, cfg);
    const double uniform = difference_root(s, 0.0, cfg).x;
    const double hi = std::min(2.0 * uniform, max_difference(model, cost, cfg));
    const auto phi = [&](double eps) { return eps - 2.0 * difference_root(s, eps, cfg).x; };
    return numerics::find_root_monotone(phi, {0.0, hi}, cfg.root);
}

Sensitivity sensitivity(const DemandModel& model, const Solution& solution, double cost) {
    if (!solution.binding) {
        throw Error(ErrorKind::Domain, "sensitivity undefined at the perfect-discrimination limit");
    }
    const DemandModel m = cost_shift(model, cost);
    if (!m.has_pdf_derivative()) {
        throw Error(ErrorKind::Capability, model.describe() + ": no closed-form density derivative");
    }
    const double low = solution.band.lower - cost;
    if (const auto* d = std::get_if<Difference>(&solution.policy)) {
        const double f_up = m.pdf(low + d->epsilon);
        const double denom = f_up + m.pdf(low) + low * m.pdf_derivative(low);
        const double d_lower = -f_up / denom;
        return {d_lower, d_lower + 1.0};
    }
    const double gamma = std::get<Ratio>(solution.policy).gamma;
    const double up = gamma * low;
    const double f_low = m.pdf(low);
    const double fp_low = m.pdf_derivative(low);
    const double denom = gamma * gamma * m.pdf(up) + f_low + low * fp_low;
    return {(m.survival(up) - up * m.pdf(up)) / denom,
            (low * low * fp_low + 2.0 * low * f_low) / denom};
}

// ---------------------------------------------------------------------------

std::size_t SweepTable::succeeded() const {
    std::size_t n = 0;
    for (const auto& row : rows) n += row.solution.has_value();
    return n;
}

SweepTable sweep(const DemandModel& model, PolicyKind kind, const std::vector<double>& params,
                 double cost, const SolverConfig& cfg, unsigned threads) {
    for (std::size_t i = 1; i < params.size(); ++i) {
        if (!(params[i] > params[i - 1])) {
            throw Error(ErrorKind::Configuration, "sweep parameters must be strictly ascending");
        }
    }
    SweepTable table;
    table.kind = kind;
    table.model = model.describe();
    table.cost = cost;
    table.efficient_trade = efficient_trade_surplus(model, cost, cfg.quad);
    table.rows.resize(params.size());

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < params.size(); i = next++) {
            SweepRow& row = table.rows[i];
            row.param = params[i];
            try {
                row.solution = solve(model, make_policy(kind, params[i]), cost, cfg);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(params.size(), 1)));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    return table;
}

std::vector<double> linspace(double from, double to, int steps) {
    if (steps < 1) throw Error(ErrorKind::Configuration, "steps must be >= 1");
    if (steps == 1) return {from};
    std::vector<double> out(steps);
    for (int i = 0; i < steps; ++i) {
        out[i] = from + (to - from) * static_cast<double>(i) / (steps - 1);
    }
    out.back() = to;
    return out;
}

std::vector<double> logspace(double from, double to, int steps) {
    if (!(from > 0.0) || !(to > 0.0)) {
        throw Error(ErrorKind::Configuration, "log-spaced grid needs positive end points");
    }
    std::vector<double> out = linspace(std::log(from), std::log(to), steps);
    for (double& x : out) x = std::exp(x);
    out.front() = from;
    if (steps > 1) out.back() = to;
    return out;
}

// ---------------------------------------------------------------------------

DominanceRecord dominance_compare(const DemandModel& model, double gamma, double cost,
                                  const SolverConfig& cfg) {
    const Solution ratio = solve_ratio(model, gamma, cost, cfg);
    DominanceRecord rec{ratio.welfare.cs, 0.0, gamma, 0.0, ratio.welfare.ps, 0.0, ratio.welfare.ts};
    if (gamma == 1.0) {
        const Solution diff = solve_difference(model, 0.0, cost, cfg);
        rec.ps_diff = diff.welfare.ps;
        rec.ts_diff = diff.welfare.ts;
        return rec;
    }

    // CS*_diff is monotone on [0, max) for MHR demand and on [eps0, max) otherwise.
    const bool mhr = check_regularity(cost_shift(model, cost), 0.0).is_mhr;
    const double lo = mhr ? 0.0 : epsilon_threshold(model, cost, cfg);
    const double hi = max_difference(model, cost, cfg);
    const auto cs_diff = [&](double eps) {
        return solve_difference(model, eps, cost, cfg).welfare.cs;
    };
    const double cs_lo = cs_diff(lo);
    const double cs_hi = cs_diff(hi);
    if (!(rec.cs_level <= cs_lo && rec.cs_level >= cs_hi)) {
        throw Error(ErrorKind::Matching, "consumer surplus " + fmt(rec.cs_level) +
                                             " not attainable under the difference policy on [" +
                                             fmt(lo) + ", " + fmt(hi) + "]: CS ranges over [" +
                                             fmt(cs_hi) + ", " + fmt(cs_lo) + "]");
    }
    const auto gap = [&](double eps) { return cs_diff(eps) - rec.cs_level; };
    rec.eps_matched = numerics::find_root_monotone(gap, {lo, hi}, cfg.root);
    const Solution diff = solve_difference(model, rec.eps_matched, cost, cfg);
    rec.ps_diff = diff.welfare.ps;
    rec.ts_diff = diff.welfare.ts;
    return rec;
}

}  // namespace fairprice
