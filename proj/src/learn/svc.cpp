#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/learn/models.hpp"
#include "strokeml/simd/kernels.hpp"

namespace strokeml::learn::detail {
namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kCacheBytes = std::size_t{256} << 20;

// Lazily computed kernel rows for one binary problem, evicted oldest-first.
class KernelRows {
public:
    KernelRows(const SvcModel& model, const data::FeatureMatrix& X, std::vector<std::size_t> rows)
        : model_(model), X_(X), rows_(std::move(rows)), cache_(rows_.size()) {
        capacity_ = std::max<std::size_t>(2, kCacheBytes / (sizeof(double) * std::max<std::size_t>(1, rows_.size())));
        diag_.resize(rows_.size());
        for (std::size_t t = 0; t < rows_.size(); ++t) diag_[t] = k(t, t);
    }

    double k(std::size_t a, std::size_t b) const { return model_.kernel_value(X_.row(rows_[a]), X_.row(rows_[b])); }
    double diag(std::size_t t) const { return diag_[t]; }

    const std::vector<double>& row(std::size_t i) {
        if (cache_[i].empty()) {
            if (order_.size() >= capacity_) {
                cache_[order_.front()].clear();
                cache_[order_.front()].shrink_to_fit();
                order_.pop_front();
            }
            auto& r = cache_[i];
            r.resize(rows_.size());
            for (std::size_t t = 0; t < rows_.size(); ++t) r[t] = k(i, t);
            order_.push_back(i);
        }
        return cache_[i];
    }

private:
    const SvcModel& model_;
    const data::FeatureMatrix& X_;
    std::vector<std::size_t> rows_;
    std::vector<std::vector<double>> cache_;
    std::deque<std::size_t> order_;
    std::vector<double> diag_;
    std::size_t capacity_ = 0;
};

struct Solution {
    std::vector<double> alpha;
    double rho = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double violation = 0.0;
};

// SMO with second-order working-set selection for
//   min 1/2 a'Qa - e'a  s.t.  0 <= a <= C, y'a = 0.
Solution solve_binary(KernelRows& K, const std::vector<double>& y, double C, double eps, std::size_t max_iter) {
    const std::size_t l = y.size();
    Solution s;
    s.alpha.assign(l, 0.0);
    std::vector<double> G(l, -1.0);
    auto& a = s.alpha;
    auto in_up = [&](std::size_t t) { return y[t] > 0 ? a[t] < C : a[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? a[t] > 0.0 : a[t] < C; };

    for (;;) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1;
        for (std::size_t t = 0; t < l; ++t) {
            if (in_up(t) && -y[t] * G[t] >= gmax) {
                gmax = -y[t] * G[t];
                i = static_cast<std::ptrdiff_t>(t);
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t j = -1;
        double best = std::numeric_limits<double>::infinity();
        const std::vector<double>* Ki = i >= 0 ? &K.row(static_cast<std::size_t>(i)) : nullptr;
        for (std::size_t t = 0; t < l; ++t) {
            if (!in_low(t)) continue;
            const double v = y[t] * G[t];
            gmax2 = std::max(gmax2, v);
            const double b = gmax + v;
            if (Ki && b > 0.0) {
                double curv = K.diag(static_cast<std::size_t>(i)) + K.diag(t) - 2.0 * (*Ki)[t];
                if (curv <= 0.0) curv = kTau;
                const double obj = -(b * b) / curv;
                if (obj <= best) {
                    best = obj;
                    j = static_cast<std::ptrdiff_t>(t);
                }
            }
        }
        s.violation = gmax + gmax2;
        if (i < 0 || j < 0 || s.violation < eps) {
            s.converged = true;
            if (i < 0 || j < 0) s.violation = std::max(0.0, s.violation);
            break;
        }
        if (s.iterations >= max_iter) break;
        ++s.iterations;

        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        const auto& Kj = K.row(uj);
        const auto& KiRef = K.row(ui);
        const double old_ai = a[ui];
        const double old_aj = a[uj];
        double curv = K.diag(ui) + K.diag(uj) - 2.0 * KiRef[uj];
        if (curv <= 0.0) curv = kTau;
        if (y[ui] != y[uj]) {
            const double delta = (-G[ui] - G[uj]) / curv;
            const double diff = a[ui] - a[uj];
            a[ui] += delta;
            a[uj] += delta;
            if (diff > 0 && a[uj] < 0) {
                a[uj] = 0;
                a[ui] = diff;
            } else if (diff <= 0 && a[ui] < 0) {
                a[ui] = 0;
                a[uj] = -diff;
            }
            if (diff > 0 && a[ui] > C) {
                a[ui] = C;
                a[uj] = C - diff;
            } else if (diff <= 0 && a[uj] > C) {
                a[uj] = C;
                a[ui] = C + diff;
            }
        } else {
            const double delta = (G[ui] - G[uj]) / curv;
            const double sum = a[ui] + a[uj];
            a[ui] -= delta;
            a[uj] += delta;
            if (sum > C && a[ui] > C) {
                a[ui] = C;
                a[uj] = sum - C;
            } else if (sum <= C && a[uj] < 0) {
                a[uj] = 0;
                a[ui] = sum;
            }
            if (sum > C && a[uj] > C) {
                a[uj] = C;
                a[ui] = sum - C;
            } else if (sum <= C && a[ui] < 0) {
                a[ui] = 0;
                a[uj] = sum;
            }
        }
        const double dai = a[ui] - old_ai;
        const double daj = a[uj] - old_aj;
        // Q_ti = y_t y_i K_ti.
        for (std::size_t t = 0; t < l; ++t) G[t] += y[t] * (y[ui] * KiRef[t] * dai + y[uj] * Kj[t] * daj);
    }

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = y[t] * G[t];
        if (a[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (a[t] <= 0.0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            free_sum += yg;
        }
    }
    s.rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : (ub + lb) / 2.0;
    return s;
}

}  // namespace

double SvcModel::kernel_value(std::span<const double> a, std::span<const double> b) const {
    if (kernel == SvcKernel::Linear) return simd::dot(a, b);
    return std::exp(-gamma * simd::squared_distance(a, b));
}

SvcModel SvcModel::fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                       const SvcParams& p) {
    SvcModel m;
    m.kernel = p.kernel;
    m.C = p.C;
    m.classes = n_classes;
    if (p.gamma) {
        m.gamma = *p.gamma;
    } else {
        const auto v = X.values();
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size());
        m.gamma = var > 0.0 ? 1.0 / (static_cast<double>(X.n_features()) * var) : 1.0;
    }

    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);

    std::map<std::size_t, std::size_t> sv_index;  // training row -> support vector row
    for (std::size_t ci = 0; ci < n_classes; ++ci) {
        for (std::size_t cj = ci + 1; cj < n_classes; ++cj) {
            std::vector<std::size_t> rows = by_class[ci];
            rows.insert(rows.end(), by_class[cj].begin(), by_class[cj].end());
            std::vector<double> sign(rows.size(), -1.0);
            std::fill(sign.begin(), sign.begin() + static_cast<std::ptrdiff_t>(by_class[ci].size()), 1.0);

            KernelRows K(m, X, rows);
            const Solution sol = solve_binary(K, sign, p.C, p.tol, p.max_passes * std::max<std::size_t>(rows.size(), 1));
            BinarySvm bin;
            bin.positive = static_cast<int>(ci);
            bin.negative = static_cast<int>(cj);
            bin.rho = sol.rho;
            bin.iterations = sol.iterations;
            bin.converged = sol.converged;
            bin.kkt_violation = sol.violation;
            bin.alpha_min = *std::min_element(sol.alpha.begin(), sol.alpha.end());
            bin.alpha_max = *std::max_element(sol.alpha.begin(), sol.alpha.end());
            for (std::size_t t = 0; t < rows.size(); ++t) {
                bin.alpha_y_sum += sol.alpha[t] * sign[t];
                if (sol.alpha[t] <= 0.0) continue;
                const auto [it, inserted] = sv_index.emplace(rows[t], sv_index.size());
                bin.support.push_back(it->second);
                bin.coef.push_back(sol.alpha[t] * sign[t]);
            }
            m.machines.push_back(std::move(bin));
        }
    }

    m.support_vectors.resize(static_cast<Eigen::Index>(sv_index.size()), static_cast<Eigen::Index>(X.n_features()));
    for (const auto& [row, idx] : sv_index) {
        const auto r = X.row(row);
        std::copy(r.begin(), r.end(), m.support_vectors.row(static_cast<Eigen::Index>(idx)).data());
    }
    return m;
}

std::vector<double> SvcModel::decision_values(std::span<const double> x) const {
    const auto d = static_cast<std::size_t>(support_vectors.cols());
    std::vector<double> k(static_cast<std::size_t>(support_vectors.rows()));
    for (std::size_t s = 0; s < k.size(); ++s) {
        k[s] = kernel_value({support_vectors.row(static_cast<Eigen::Index>(s)).data(), d}, x);
    }
    std::vector<double> out;
    out.reserve(machines.size());
    for (const auto& bin : machines) {
        double f = -bin.rho;
        for (std::size_t t = 0; t < bin.support.size(); ++t) f += bin.coef[t] * k[bin.support[t]];
        out.push_back(f);
    }
    return out;
}

void SvcModel::scores(std::span<const double> x, std::span<double> out) const {
    std::vector<double> votes(classes, 0.0), margin(classes, 0.0);
    const auto dec = decision_values(x);
    for (std::size_t m = 0; m < machines.size(); ++m) {
        votes[dec[m] > 0.0 ? machines[m].positive : machines[m].negative] += 1.0;
        margin[machines[m].positive] += dec[m];
        margin[machines[m].negative] -= dec[m];
    }
    // The tie-break term stays below one vote, so it never overturns a vote count.
    const double scale = static_cast<double>(std::max<std::size_t>(machines.size(), 1));
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        out[c] = votes[c] + 0.999 * 0.5 * (1.0 + std::tanh(margin[c] / scale));
        total += out[c];
    }
    for (std::size_t c = 0; c < classes; ++c) out[c] /= total;
}

nlohmann::json SvcModel::payload() const {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& b : machines) {
        ms.push_back({{"positive", b.positive},
                      {"negative", b.negative},
                      {"support", b.support},
                      {"coef", io::vector_to_json(b.coef)},
                      {"rho", b.rho},
                      {"iterations", b.iterations},
                      {"converged", b.converged},
                      {"kkt_violation", b.kkt_violation}});
    }
    return {{"kernel", kernel == SvcKernel::Rbf ? "rbf" : "linear"},
            {"gamma", gamma},
            {"C", C},
            {"classes", classes},
            {"support_vectors", io::matrix_to_json(support_vectors)},
            {"machines", ms}};
}

SvcModel SvcModel::from_payload(const nlohmann::json& j) {
    SvcModel m;
    m.kernel = j.at("kernel").get<std::string>() == "linear" ? SvcKernel::Linear : SvcKernel::Rbf;
    m.gamma = j.at("gamma").get<double>();
    m.C = j.at("C").get<double>();
    m.classes = j.at("classes").get<std::size_t>();
    m.support_vectors = io::matrix_from_json(j.at("support_vectors"));
    for (const auto& b : j.at("machines")) {
        BinarySvm bin;
        bin.positive = b.at("positive").get<int>();
        bin.negative = b.at("negative").get<int>();
        bin.support = b.at("support").get<std::vector<std::size_t>>();
        bin.coef = io::vector_from_json(b.at("coef"));
        bin.rho = b.at("rho").get<double>();
        bin.iterations = b.at("iterations").get<std::size_t>();
        bin.converged = b.at("converged").get<bool>();
        bin.kkt_violation = b.at("kkt_violation").get<double>();
        if (bin.support.size() != bin.coef.size()) throw Error(ErrorCode::CorruptPayload, "SVC machine is inconsistent");
        for (auto s : bin.support) {
            if (s >= static_cast<std::size_t>(m.support_vectors.rows())) {
                throw Error(ErrorCode::CorruptPayload, "SVC support index out of range");
            }
        }
        if (bin.positive < 0 || bin.negative < 0 || static_cast<std::size_t>(std::max(bin.positive, bin.negative)) >= m.classes) {
            throw Error(ErrorCode::CorruptPayload, "SVC machine names an unknown class");
        }
        m.machines.push_back(std::move(bin));
    }
    return m;
}

bool SvcModel::accepts_width(std::size_t d) const {
    return support_vectors.rows() == 0 || static_cast<std::size_t>(support_vectors.cols()) == d;
}

}  // namespace strokeml::learn::detail
