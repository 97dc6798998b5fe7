#include "fpmax/calibrate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fpmax/errors.hpp"
#include "json.hpp"

namespace fpmax::cost {

namespace {

using nlohmann::json;

constexpr double kBad = 10.0;  // residual reported for an unreachable target

const double kLower[TechParams::kFitted] = {1, 0.2, 1.0, 0.01, 0.01, 1e-3, 0.05, 0, 0, 0};
const double kUpper[TechParams::kFitted] = {100, 0.6, 2.0, 0.2, 100, 1e8, 5, 50, 100, 500};

double num(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw ParseError(std::string("targets: missing number '") + key + "'");
    return j[key].get<double>();
}

std::string str(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw ParseError(std::string("targets: missing string '") + key + "'");
    return j[key].get<std::string>();
}

struct Model {
    std::string name;
    Structure s;
    double sz_fma_cma_is_cma;  // 1 for cascade designs
    double sizing(const TechParams& tp) const { return sz_fma_cma_is_cma > 0 ? tp.sizing_cma : tp.sizing_fma; }
};

Model model_for(const std::string& name) {
    FmacConfig cfg = FmacConfig::preset(name);
    return {name, structure(cfg), cfg.architecture == Architecture::CMA ? 1.0 : 0.0};
}

double area_of(const Model& m, const TechParams& tp) {
    return tp.area_per_gate * (m.s.gates * m.sizing(tp) + m.s.flop_bits * tp.flop_area) * 1e-6;
}

// Lowest v_dd reaching f at bias bb, by bisection.
bool vdd_for(const Model& m, const TechParams& tp, double f, double bb, double& v) {
    double sz = m.sizing(tp);
    auto reaches = [&](double x) {
        return operational({x, bb}, tp) && frequency_at(m.s, sz, x, bb, tp) >= f;
    };
    double lo = kVddMin, hi = kVddMax;
    if (!reaches(hi)) return false;
    if (reaches(lo)) {
        v = lo;
        return true;
    }
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (reaches(mid) ? hi : lo) = mid;
    }
    v = hi;
    return true;
}

// Minimum power at frequency f over the bias values.
bool min_power(const Model& m, const TechParams& tp, double f, const std::vector<double>& bbs, double& best) {
    bool any = false;
    for (double bb : bbs) {
        double v;
        if (!vdd_for(m, tp, f, bb, v)) continue;
        double p = power_at(m.s, m.sizing(tp), v, bb, f, tp, {}).total_w;
        if (!any || p < best) best = p;
        any = true;
    }
    return any;
}

class Problem {
public:
    Problem(const CalibrationTargets& t, const TechParams& base) : t_(t), base_(base) {
        if (t.presets.empty()) throw CalibrationError("calibration needs at least one preset target");
        for (const auto& p : t.presets) models_.push_back(model_for(p.name));
        for (const auto& p : t.peaks) peak_models_.push_back(model_for(p.name));
        for (const auto& r : t.bb_power_reduction) red_models_.push_back(model_for(r.name));
    }

    std::vector<Residual> eval(const TechParams& tp) const {
        std::vector<Residual> out;
        auto push = [&](const std::string& name, double pred, double target, bool ok) {
            out.push_back({name, pred, target, ok ? pred / target - 1 : kBad});
        };
        for (std::size_t i = 0; i < t_.presets.size(); ++i) {
            const auto& p = t_.presets[i];
            const Model& m = models_[i];
            bool ok = operational({p.v_dd, p.v_bb}, tp);
            double f = 0, area = area_of(m, tp);
            PowerBreakdown pw;
            if (ok) {
                f = frequency_at(m.s, m.sizing(tp), p.v_dd, p.v_bb, tp);
                pw = power_at(m.s, m.sizing(tp), p.v_dd, p.v_bb, f, tp, {});
            }
            push(p.name + ".freq_ghz", f, p.freq_ghz, ok);
            push(p.name + ".area_mm2", area, p.area_mm2, true);
            push(p.name + ".total_mw", pw.total_w * 1e3, p.total_mw, ok);
            push(p.name + ".leak_mw", pw.leakage_w * 1e3, p.leak_mw, ok);
        }
        for (std::size_t i = 0; i < t_.peaks.size(); ++i) {
            const Model& m = peak_models_[i];
            double best_ee = 0, best_ae = 0, area = area_of(m, tp);
            for (double v : t_.vdd_grid)
                for (double bb : t_.vbb_grid) {
                    if (!operational({v, bb}, tp)) continue;
                    double f = frequency_at(m.s, m.sizing(tp), v, bb, tp);
                    double p = power_at(m.s, m.sizing(tp), v, bb, f, tp, {}).total_w;
                    best_ee = std::max(best_ee, 2 * f / p);
                    best_ae = std::max(best_ae, 2 * f / area);
                }
            push(t_.peaks[i].name + ".peak_gflops_per_w", best_ee, t_.peaks[i].gflops_per_w, best_ee > 0);
            push(t_.peaks[i].name + ".peak_gflops_per_mm2", best_ae, t_.peaks[i].gflops_per_mm2, best_ae > 0);
        }
        for (std::size_t i = 0; i < t_.bb_power_reduction.size(); ++i) {
            const Model& m = red_models_[i];
            const auto& r = t_.bb_power_reduction[i];
            double pred = 0;
            bool ok = false;
            const PresetTarget* nom = nullptr;
            for (const auto& p : t_.presets)
                if (p.name == r.name) nom = &p;
            if (!nom) throw CalibrationError("bb_power_reduction target " + r.name + " has no preset row");
            if (operational({nom->v_dd, nom->v_bb}, tp)) {
                double f = frequency_at(m.s, m.sizing(tp), nom->v_dd, nom->v_bb, tp);
                double with, without;
                if (min_power(m, tp, f, t_.vbb_grid, with) && min_power(m, tp, f, {kVbbMin}, without)) {
                    pred = 1 - with / without;
                    ok = true;
                }
            }
            push(r.name + ".bb_power_reduction", pred, r.value, ok);
        }
        return out;
    }

    Eigen::VectorXd vec(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const {
        auto r = eval(with(x));
        Eigen::VectorXd v(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) v[i] = r[i].relative * w[i];
        return v;
    }

    TechParams with(const Eigen::VectorXd& x) const {
        TechParams tp = base_;
        tp.set_fitted(std::vector<double>(x.data(), x.data() + x.size()));
        return tp;
    }

    int size() const {
        return static_cast<int>(4 * t_.presets.size() + 2 * t_.peaks.size() + t_.bb_power_reduction.size());
    }

private:
    const CalibrationTargets& t_;
    TechParams base_;
    std::vector<Model> models_, peak_models_, red_models_;
};

struct LmResult {
    Eigen::VectorXd x;
    double cost = 0;
    int iterations = 0;
    bool converged = false;
};

// Levenberg-Marquardt with Marquardt scaling and an active set for bounds.
LmResult levenberg_marquardt(const Problem& pb, Eigen::VectorXd x, const Eigen::VectorXd& w, int max_iter) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = kLower[i];
        hi[i] = kUpper[i];
    }
    x = x.cwiseMax(lo).cwiseMin(hi);
    Eigen::VectorXd r = pb.vec(x, w);
    double cost = 0.5 * r.squaredNorm();
    double lambda = 1e-3;
    LmResult res;
    for (int it = 1; it <= max_iter; ++it) {
        res.iterations = it;
        Eigen::MatrixXd J(r.size(), n);
        for (int i = 0; i < n; ++i) {
            double h = 1e-6 * std::max(std::abs(x[i]), 1e-3);
            Eigen::VectorXd xp = x;
            if (xp[i] + h > hi[i]) h = -h;
            xp[i] += h;
            J.col(i) = (pb.vec(xp, w) - r) / h;
        }
        Eigen::VectorXd g = J.transpose() * r;
        Eigen::MatrixXd A = J.transpose() * J;
        bool improved = false;
        while (lambda < 1e12) {
            // free set: parameters not pinned against a bound by the step
            std::vector<int> fr;
            for (int i = 0; i < n; ++i) {
                bool at_lo = x[i] <= lo[i] && g[i] > 0, at_hi = x[i] >= hi[i] && g[i] < 0;
                if (!at_lo && !at_hi) fr.push_back(i);
            }
            Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
            if (!fr.empty()) {
                const int m = static_cast<int>(fr.size());
                Eigen::MatrixXd Af(m, m);
                Eigen::VectorXd gf(m);
                for (int a = 0; a < m; ++a) {
                    gf[a] = g[fr[a]];
                    for (int b = 0; b < m; ++b) Af(a, b) = A(fr[a], fr[b]);
                    Af(a, a) += lambda * std::max(A(fr[a], fr[a]), 1e-12);
                }
                Eigen::VectorXd d = Af.ldlt().solve(-gf);
                for (int a = 0; a < m; ++a) step[fr[a]] = d[a];
            }
            Eigen::VectorXd xn = (x + step).cwiseMax(lo).cwiseMin(hi);
            Eigen::VectorXd rn = pb.vec(xn, w);
            double cn = 0.5 * rn.squaredNorm();
            if (std::isfinite(cn) && cn < cost) {
                double rel = (cost - cn) / std::max(cost, 1e-300);
                double dx = (xn - x).cwiseQuotient(x.cwiseAbs().cwiseMax(1e-3)).norm();
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda / 3, 1e-12);
                improved = true;
                if (rel < 1e-12 || dx < 1e-12) res.converged = true;
                break;
            }
            lambda *= 2;
        }
        if (!improved) res.converged = true;  // no descent left at any damping
        if (res.converged) break;
    }
    res.x = x;
    res.cost = cost;
    return res;
}

void to_json_rows(json& j, const std::vector<Residual>& rs) {
    for (const auto& r : rs)
        j.push_back({{"name", r.name}, {"predicted", r.predicted}, {"target", r.target}, {"relative", r.relative}});
}

}  // namespace

CalibrationTargets CalibrationTargets::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("targets: ") + e.what());
    }
    CalibrationTargets t;
    if (!j.contains("presets") || !j["presets"].is_array()) throw ParseError("targets: 'presets' array required");
    for (const auto& p : j["presets"])
        t.presets.push_back({str(p, "name"), num(p, "v_dd"), num(p, "v_bb"), num(p, "freq_ghz"), num(p, "area_mm2"),
                             num(p, "total_mw"), num(p, "leak_mw")});
    if (j.contains("peaks"))
        for (const auto& p : j["peaks"])
            t.peaks.push_back({str(p, "name"), num(p, "gflops_per_w"), num(p, "gflops_per_mm2")});
    if (j.contains("bb_power_reduction"))
        for (const auto& p : j["bb_power_reduction"]) t.bb_power_reduction.push_back({str(p, "name"), num(p, "value")});
    if (j.contains("vdd_grid")) t.vdd_grid = j["vdd_grid"].get<std::vector<double>>();
    if (j.contains("vbb_grid")) t.vbb_grid = j["vbb_grid"].get<std::vector<double>>();
    for (const auto& p : t.presets) FmacConfig::preset(p.name);
    return t;
}

CalibrationTargets CalibrationTargets::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open targets file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string CalibrationTargets::to_json() const {
    json j;
    j["presets"] = json::array();
    for (const auto& p : presets)
        j["presets"].push_back({{"name", p.name}, {"v_dd", p.v_dd}, {"v_bb", p.v_bb}, {"freq_ghz", p.freq_ghz},
                                {"area_mm2", p.area_mm2}, {"total_mw", p.total_mw}, {"leak_mw", p.leak_mw}});
    j["peaks"] = json::array();
    for (const auto& p : peaks)
        j["peaks"].push_back({{"name", p.name}, {"gflops_per_w", p.gflops_per_w}, {"gflops_per_mm2", p.gflops_per_mm2}});
    j["bb_power_reduction"] = json::array();
    for (const auto& r : bb_power_reduction) j["bb_power_reduction"].push_back({{"name", r.name}, {"value", r.value}});
    j["vdd_grid"] = vdd_grid;
    j["vbb_grid"] = vbb_grid;
    return j.dump(2);
}

double CalibrationResult::max_abs_residual() const {
    double m = 0;
    for (const auto& r : residuals) m = std::max(m, std::abs(r.relative));
    return m;
}

std::string CalibrationResult::to_json() const {
    json j;
    j["tech"] = json::parse(tech.to_json());
    j["iterations"] = iterations;
    j["residuals"] = json::array();
    to_json_rows(j["residuals"], residuals);
    return j.dump(2);
}

std::vector<Residual> residuals(const CalibrationTargets& t, const TechParams& tp) { return Problem(t, tp).eval(tp); }

CalibrationResult calibrate(const CalibrationTargets& targets, const CalibrationOptions& opt) {
    Problem pb(targets, opt.initial);
    const int m = pb.size();
    std::vector<double> x0 = opt.initial.fitted();
    std::vector<Eigen::VectorXd> starts{Eigen::Map<Eigen::VectorXd>(x0.data(), x0.size())};
    for (auto [vt0, alpha] : opt.starts) {
        Eigen::VectorXd s = starts.front();
        s[1] = vt0;
        s[2] = alpha;
        starts.push_back(s);
    }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
    LmResult best;
    bool have = false;
    int iters = 0;
    for (const auto& s : starts) {
        LmResult r = levenberg_marquardt(pb, s, w, opt.max_iterations);
        iters += r.iterations;
        if (!r.converged) continue;
        if (!have || r.cost < best.cost) best = r;
        have = true;
    }
    if (!have) {
        json j = json::array();
        to_json_rows(j, pb.eval(pb.with(starts.front())));
        throw CalibrationError("calibration did not converge within " + std::to_string(opt.max_iterations) +
                               " iterations; residuals at the initial guess: " + j.dump());
    }
    Eigen::VectorXd x = best.x;
    for (int pass = 0; pass < opt.reweight_passes; ++pass) {
        auto rs = pb.eval(pb.with(x));
        for (int i = 0; i < m; ++i) w[i] = std::sqrt(w[i] * w[i] * (std::abs(rs[i].relative) + 1e-3));
        w /= w.mean();
        LmResult r = levenberg_marquardt(pb, x, w, opt.max_iterations);
        iters += r.iterations;
        x = r.x;
    }
    CalibrationResult out;
    out.tech = pb.with(x);
    out.residuals = pb.eval(out.tech);
    out.iterations = iters;
    return out;
}

}  // namespace fpmax::cost
