#pragma once

#include "cocycle/forms.hpp"
#include "cocycle/parallel.hpp"
#include "cocycle/simplicial.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cocycle {

inline constexpr double kCoherenceTol = 1e-9;
inline constexpr double kTelescopingTol = 1e-7;
inline constexpr std::size_t kMinSamples = 8;

using Sampled = std::complex<double>;

struct CoherenceReport {
    bool pass = true;
    double max_residual = 0;
    std::string worst;  // "p,q,r" or "chart p,q"

    nlohmann::json to_json() const { return {{"pass", pass}, {"max_residual", max_residual}, {"worst", worst}}; }
};

/// Charts rho_0..rho_l on a common source W and transitions phi_{p,q} = rho_p o rho_q^{-1} for p < q.
class ChartSimplex {
public:
    ChartSimplex() = default;
    ChartSimplex(std::vector<HoloMap> charts, std::map<std::pair<int, int>, HoloMap> transitions,
                 std::vector<Point> samples)
        : charts_(std::move(charts)), transitions_(std::move(transitions)), samples_(std::move(samples)) {
        if (charts_.empty()) throw ValidationError("chart simplex needs at least one chart");
        const int n = charts_[0].dim();
        for (const auto& c : charts_)
            if (c.dim() != n) throw ValidationError("charts differ in dimension");
        for (int p = 0; p < level(); ++p)
            for (int q = p + 1; q <= level(); ++q) {
                auto it = transitions_.find({p, q});
                if (it == transitions_.end())
                    throw ValidationError("missing transition " + std::to_string(p) + "," + std::to_string(q));
                if (it->second.dim() != n) throw ValidationError("transition dimension mismatch");
            }
        for (const auto& z : samples_)
            if (z.size() != n) throw ValidationError("sample point dimension mismatch");
    }

    /// From the last chart and consecutive steps phi_{i,i+1}; all other data by composition.
    static ChartSimplex from_chain(const HoloMap& last_chart, const std::vector<HoloMap>& steps,
                                   std::vector<Point> samples) {
        const int l = static_cast<int>(steps.size());
        std::map<std::pair<int, int>, HoloMap> tr;
        for (int p = l - 1; p >= 0; --p) {
            tr[{p, p + 1}] = steps[p];
            for (int q = p + 2; q <= l; ++q) tr[{p, q}] = compose(steps[p], tr.at({p + 1, q}));
        }
        std::vector<HoloMap> charts(l + 1);
        charts[l] = last_chart;
        for (int p = l - 1; p >= 0; --p) charts[p] = compose(steps[p], charts[p + 1]);
        return ChartSimplex(std::move(charts), std::move(tr), std::move(samples));
    }

    /// From charts with known inverses: phi_{p,q} = rho_p o rho_q^{-1}.
    static ChartSimplex from_charts(std::vector<HoloMap> charts, const std::vector<HoloMap>& inverses,
                                    std::vector<Point> samples) {
        if (charts.size() != inverses.size()) throw ValidationError("one inverse per chart required");
        std::map<std::pair<int, int>, HoloMap> tr;
        for (std::size_t p = 0; p < charts.size(); ++p)
            for (std::size_t q = p + 1; q < charts.size(); ++q)
                tr[{int(p), int(q)}] = compose(charts[p], inverses[q]);
        return ChartSimplex(std::move(charts), std::move(tr), std::move(samples));
    }

    int level() const { return static_cast<int>(charts_.size()) - 1; }
    int dim() const { return charts_[0].dim(); }
    const HoloMap& chart(int i) const { return charts_.at(i); }
    const std::vector<Point>& samples() const { return samples_; }
    const std::map<std::pair<int, int>, HoloMap>& transitions() const { return transitions_; }

    HoloMap transition(int p, int q) const {
        if (p == q) return HoloMap::identity(dim());
        auto it = transitions_.find({p, q});
        if (it == transitions_.end())
            throw ValidationError("missing transition " + std::to_string(p) + "," + std::to_string(q));
        return it->second;
    }

    ChartSimplex with_transition(int p, int q, HoloMap m) const {
        ChartSimplex s = *this;
        s.transitions_[{p, q}] = std::move(m);
        return s;
    }

    /// Sub-simplex on the given strictly increasing chart indices.
    ChartSimplex sub(const Cell& idx) const {
        std::vector<HoloMap> ch;
        std::map<std::pair<int, int>, HoloMap> tr;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            ch.push_back(chart(idx[a]));
            for (std::size_t b = a + 1; b < idx.size(); ++b) tr[{int(a), int(b)}] = transition(idx[a], idx[b]);
        }
        return ChartSimplex(std::move(ch), std::move(tr), samples_);
    }

    ChartSimplex face(int j) const {
        if (level() < 1 || j < 0 || j > level()) throw ValidationError("face index out of range");
        Cell idx;
        for (int i = 0; i <= level(); ++i)
            if (i != j) idx.push_back(i);
        return sub(idx);
    }

    /// Repeats chart j; the new transition between the two copies is the identity.
    ChartSimplex degeneracy(int j) const {
        if (j < 0 || j > level()) throw ValidationError("degeneracy index out of range");
        auto src = [j](int i) { return i <= j ? i : i - 1; };
        std::vector<HoloMap> ch;
        std::map<std::pair<int, int>, HoloMap> tr;
        for (int a = 0; a <= level() + 1; ++a) {
            ch.push_back(chart(src(a)));
            for (int b = a + 1; b <= level() + 1; ++b) tr[{a, b}] = transition(src(a), src(b));
        }
        return ChartSimplex(std::move(ch), std::move(tr), samples_);
    }

    ChartSimplex with_samples(std::vector<Point> pts) const {
        ChartSimplex s = *this;
        s.samples_ = std::move(pts);
        return s;
    }

    ChartSimplex restricted(const std::vector<std::size_t>& ids) const {
        std::vector<Point> pts;
        for (auto i : ids) pts.push_back(samples_.at(i));
        ChartSimplex s = *this;
        s.samples_ = std::move(pts);
        return s;
    }

    /// Charts precomposed with psi : W' -> W, sampled on W'.
    ChartSimplex precomposed(const HoloMap& psi, std::vector<Point> samples) const {
        ChartSimplex s = *this;
        for (auto& c : s.charts_) c = compose(c, psi);
        s.samples_ = std::move(samples);
        return s;
    }

    CoherenceReport coherence(double tol = kCoherenceTol) const {
        CoherenceReport r;
        auto note = [&](double res, std::string where) {
            if (!std::isfinite(res)) res = std::numeric_limits<double>::infinity();
            if (r.worst.empty() || res > r.max_residual) {
                r.max_residual = res;
                r.worst = std::move(where);
            }
        };
        for (const auto& w : samples_) {
            std::vector<Point> images;
            for (const auto& c : charts_) images.push_back(c(w));
            for (int p = 0; p <= level(); ++p)
                for (int q = p + 1; q <= level(); ++q) {
                    Point y = transition(p, q)(images[q]);
                    note((y - images[p]).cwiseAbs().maxCoeff(), "chart " + std::to_string(p) + "," + std::to_string(q));
                    for (int s = q + 1; s <= level(); ++s) {
                        Point a = transition(p, q)(transition(q, s)(images[s]));
                        Point b = transition(p, s)(images[s]);
                        note((a - b).cwiseAbs().maxCoeff(),
                             std::to_string(p) + "," + std::to_string(q) + "," + std::to_string(s));
                    }
                }
        }
        r.pass = r.max_residual <= tol;
        return r;
    }

private:
    std::vector<HoloMap> charts_;
    std::map<std::pair<int, int>, HoloMap> transitions_;
    std::vector<Point> samples_;
};

/// phi_{r,l}^# theta(phi_{r-1,r}), a form on the last chart's image.
inline MatrixOneForm theta_r(const ChartSimplex& s, int r) {
    if (r < 1 || r > s.level()) throw ValidationError("theta_r: r out of range");
    return sharp_pullback(s.transition(r, s.level()), theta(s.transition(r - 1, r)));
}

/// rho_k^* T[theta_1, ..., theta_k] on the source.
inline ScalarKForm cf_label_top(const ChartSimplex& s, const InvariantMap& t) {
    const int k = s.level();
    if (t.arity != k) throw ValidationError("cf_label_top: level " + std::to_string(k) + " differs from arity " +
                                            std::to_string(t.arity));
    if (k == 0) throw ValidationError("cf_label_top: arity must be positive");
    std::vector<MatrixOneForm> thetas;
    for (int r = 1; r <= k; ++r) thetas.push_back(theta_r(s, r));
    return pullback_kform(s.chart(k), apply_invariant(t, thetas));
}

/// Coefficients of a k-form at each sample, concatenated.
inline Element<Sampled> sample_form(const ScalarKForm& w, const std::vector<Point>& pts) {
    auto parts = parallel_map<Vector>(pts.size(), [&](std::size_t i) { return w(pts[i]); });
    Element<Sampled> out;
    for (const auto& v : parts)
        for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i) + 0.0);
    return out;
}

/// Sampled k-forms placed in degree -k with zero differential.
inline GradedComplex<Sampled> sampled_form_complex(int n, int k, std::size_t points, double tol = kTelescopingTol) {
    const int size = static_cast<int>(k_subsets(n, k).size() * points);
    return GradedComplex<Sampled>({{-k, size}}, {}, tol);
}

inline DKSimplex<Sampled> cf_map(const ChartSimplex& s, const InvariantMap& t) {
    const int k = t.arity, l = s.level();
    auto c = sampled_form_complex(s.dim(), k, s.samples().size());
    DKSimplex<Sampled> out = DKSimplex<Sampled>::zero(l, c);
    if (l < k) return out;
    for (auto& [cell, label] : out.labels)
        if (static_cast<int>(cell.size()) == k + 1) label = sample_form(cf_label_top(s.sub(cell), t), s.samples());
    return out;
}

struct TelescopingReport {
    bool pass = true;
    double tol = kTelescopingTol;
    double max_residual = 0;
    std::size_t worst_point = 0;
    std::vector<double> point_residuals;
    CoherenceReport coherence;
    std::vector<std::string> warnings;

    nlohmann::json to_json(const std::vector<Point>& pts) const {
        nlohmann::json j = {{"pass", pass},         {"tol", tol},
                            {"max_residual", max_residual}, {"coherence", coherence.to_json()},
                            {"warnings", warnings}, {"points", nlohmann::json::array()}};
        if (!pts.empty()) j["worst_point"] = point_json(pts.at(worst_point));
        for (std::size_t i = 0; i < point_residuals.size(); ++i)
            j["points"].push_back({{"index", i}, {"residual", point_residuals[i]}});
        return j;
    }
};

inline std::vector<std::string> sample_warnings(std::size_t count) {
    if (count >= kMinSamples) return {};
    return {"only " + std::to_string(count) + " sample points supplied; at least " + std::to_string(kMinSamples) +
            " recommended"};
}

/// Alternating face sum of top labels over a level k+1 simplex, pointwise.
inline TelescopingReport verify_telescoping(const ChartSimplex& s, const InvariantMap& t,
                                            const std::vector<Point>& points, double tol = kTelescopingTol) {
    if (s.level() != t.arity + 1) throw ValidationError("verify_telescoping: level must be arity + 1");
    TelescopingReport r;
    r.tol = tol;
    r.warnings = sample_warnings(points.size());
    std::vector<ScalarKForm> faces;
    for (int j = 0; j <= s.level(); ++j) faces.push_back(cf_label_top(s.face(j), t));
    r.point_residuals = parallel_map<double>(points.size(), [&](std::size_t i) {
        Vector acc = Vector::Zero(static_cast<Eigen::Index>(k_subsets(s.dim(), t.arity).size()));
        for (int j = 0; j <= s.level(); ++j) acc += (j % 2 ? -1.0 : 1.0) * faces[j](points[i]);
        double m = max_abs(acc);
        return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
    });
    for (std::size_t i = 0; i < r.point_residuals.size(); ++i)
        if (r.point_residuals[i] > r.max_residual) {
            r.max_residual = r.point_residuals[i];
            r.worst_point = i;
        }
    r.coherence = s.with_samples(points).coherence();
    r.pass = r.max_residual <= tol;
    return r;
}


}  // namespace cocycle
