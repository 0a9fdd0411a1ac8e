#include "strokeml/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "strokeml/error.hpp"

namespace strokeml::data {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

struct Header {
    std::size_t id_col = 0;
    std::size_t label_col = 0;
    std::optional<std::size_t> split_col;
    std::vector<std::size_t> feature_cols;  // feature j lives in column feature_cols[j]
    std::size_t width = 0;
};

Header parse_header(const std::vector<std::string>& cols) {
    Header h;
    h.width = cols.size();
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < cols.size(); ++i) by_name[trim(cols[i])] = i;
    auto require = [&](const std::string& name) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw CsvError(ErrorCode::MissingColumn, 0, name, "required column absent");
        return it->second;
    };
    h.id_col = require("id");
    h.label_col = require("label");
    if (auto it = by_name.find("split"); it != by_name.end()) h.split_col = it->second;

    std::size_t n_feature_cols = 0;
    for (const auto& [name, idx] : by_name) {
        if (name == "id" || name == "label" || name == "split") continue;
        if (name.size() < 2 || name[0] != 'f' ||
            !std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            throw CsvError(ErrorCode::MissingColumn, 0, name, "unexpected column; features must be named f0..f{d-1}");
        }
        ++n_feature_cols;
    }
    if (n_feature_cols == 0) throw CsvError(ErrorCode::MissingColumn, 0, "f0", "no feature columns");
    if (by_name.size() != cols.size()) throw CsvError(ErrorCode::MissingColumn, 0, "", "duplicate column names");
    for (std::size_t j = 0; j < n_feature_cols; ++j) {
        h.feature_cols.push_back(require("f" + std::to_string(j)));
    }
    return h;
}

std::optional<double> parse_number(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) return std::nullopt;
    const char* first = t.data();
    if (*first == '+') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

LoadedFeatures read_features(std::istream& in, const LoadOptions& options) {
    std::string line;
    if (!std::getline(in, line)) throw CsvError(ErrorCode::MissingColumn, 0, "id", "empty file");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const Header header = parse_header(split_csv_line(line));
    const std::size_t d = header.feature_cols.size();

    struct RawRow {
        std::string id, label, split;
    };
    std::vector<RawRow> raw;
    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.width) {
            throw CsvError(ErrorCode::RaggedRow, row, "",
                           "expected " + std::to_string(header.width) + " fields, found " +
                               std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < d; ++j) {
            const auto& tok = fields[header.feature_cols[j]];
            const auto v = parse_number(tok);
            if (!v) throw CsvError(ErrorCode::NonNumericValue, row, "f" + std::to_string(j), "'" + tok + "' is not a number");
            if (!std::isfinite(*v)) throw CsvError(ErrorCode::NonFiniteFeature, row, "f" + std::to_string(j), "non-finite value");
            values.push_back(*v);
        }
        raw.push_back({trim(fields[header.id_col]), trim(fields[header.label_col]),
                       header.split_col ? lower(trim(fields[*header.split_col])) : std::string()});
    }
    if (raw.empty()) throw CsvError(ErrorCode::RaggedRow, 1, "", "file has a header but no data rows");

    std::vector<std::string> class_names = options.class_names;
    if (class_names.empty()) {
        if (options.infer_classes) {
            std::set<std::string> seen;
            for (const auto& r : raw) seen.insert(r.label);
            class_names.assign(seen.begin(), seen.end());
        } else {
            class_names = stroke_class_names();
        }
    }
    std::map<std::string, int> by_name;
    for (std::size_t c = 0; c < class_names.size(); ++c) by_name[lower(class_names[c])] = static_cast<int>(c);

    LabelVector y;
    y.class_names = class_names;
    y.values.reserve(raw.size());
    std::vector<std::string> ids;
    ids.reserve(raw.size());
    std::vector<Split> splits;
    std::size_t n_split_set = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& r = raw[i];
        int label = -1;
        if (auto it = by_name.find(lower(r.label)); it != by_name.end()) {
            label = it->second;
        } else if (auto v = parse_number(r.label); v && *v == std::floor(*v) && *v >= 0 &&
                                                    *v < static_cast<double>(class_names.size())) {
            label = static_cast<int>(*v);
        } else {
            throw CsvError(ErrorCode::UnknownLabel, i + 1, "label", "'" + r.label + "' is not a declared class");
        }
        y.values.push_back(label);
        ids.push_back(r.id);

        if (r.split.empty()) {
            splits.push_back(Split::Train);
        } else {
            ++n_split_set;
            if (r.split == "train") splits.push_back(Split::Train);
            else if (r.split == "test") splits.push_back(Split::Test);
            else if (r.split == "val" || r.split == "validation") splits.push_back(Split::Validation);
            else throw CsvError(ErrorCode::InvalidArgument, i + 1, "split", "'" + r.split + "' is not train/test/val");
        }
    }
    if (n_split_set != 0 && n_split_set != raw.size()) {
        throw CsvError(ErrorCode::InvalidArgument, 0, "split", "split column is filled for some rows but not all");
    }

    LoadedFeatures out{FeatureMatrix(raw.size(), d, std::move(values), std::move(ids)), std::move(y), std::nullopt};
    if (n_split_set != 0) out.split = SplitAssignment{std::move(splits)};
    return out;
}

LoadedFeatures load_features(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open features file " + path.string());
    return read_features(in, options);
}

void write_features(std::ostream& out, const FeatureMatrix& X, const LabelVector& y,
                    const std::optional<SplitAssignment>& split) {
    if (y.size() != X.n_samples()) throw Error(ErrorCode::LengthMismatch, "labels and rows differ in length");
    out << "id,label,split";
    for (std::size_t j = 0; j < X.n_features(); ++j) out << ",f" << j;
    out << '\n';
    for (std::size_t i = 0; i < X.n_samples(); ++i) {
        out << quote_if_needed(X.sample_ids()[i]) << ','
            << quote_if_needed(y.class_names[static_cast<std::size_t>(y.values[i])]) << ',';
        if (split) out << to_string(split->split[i]);
        for (double v : X.row(i)) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& X, const LabelVector& y,
                    const std::optional<SplitAssignment>& split) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::UnwritablePath, "cannot write " + path.string());
    write_features(out, X, y, split);
}

}  // namespace strokeml::data
