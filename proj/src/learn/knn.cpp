#include <algorithm>
#include <numeric>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/learn/models.hpp"
#include "strokeml/simd/kernels.hpp"

namespace strokeml::learn::detail {

KnnModel KnnModel::fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                       const KnnParams& p) {
    KnnModel m;
    m.train = X.as_eigen();
    m.labels.assign(y.begin(), y.end());
    m.k = std::min(p.k, X.n_samples());
    m.classes = n_classes;
    return m;
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> x) const {
    const auto n = static_cast<std::size_t>(train.rows());
    const auto d = static_cast<std::size_t>(train.cols());
    const auto& kern = simd::active();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = kern.squared_distance(x.data(), train.row(i).data(), d);

    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
    const double radius = sorted[k - 1];
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] <= radius) out.push_back(i);
    }
    return out;
}

void KnnModel::scores(std::span<const double> x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const auto nb = neighbors(x);
    for (std::size_t i : nb) out[labels[i]] += 1.0;
    for (double& v : out) v /= static_cast<double>(nb.size());
}

nlohmann::json KnnModel::payload() const {
    return {{"train", io::matrix_to_json(train)}, {"labels", labels}, {"k", k}, {"classes", classes}};
}

KnnModel KnnModel::from_payload(const nlohmann::json& j) {
    KnnModel m;
    m.train = io::matrix_from_json(j.at("train"));
    m.labels = j.at("labels").get<std::vector<int>>();
    m.k = j.at("k").get<std::size_t>();
    m.classes = j.at("classes").get<std::size_t>();
    if (m.labels.size() != static_cast<std::size_t>(m.train.rows()) || m.k == 0 || m.k > m.labels.size()) {
        throw Error(ErrorCode::CorruptPayload, "KNN payload is inconsistent");
    }
    return m;
}

bool KnnModel::accepts_width(std::size_t d) const { return static_cast<std::size_t>(train.cols()) == d; }

}  // namespace strokeml::learn::detail
