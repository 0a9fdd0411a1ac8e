#include "strokeml/pipeline/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "strokeml/data/csv.hpp"
#include "strokeml/error.hpp"

namespace strokeml::pipeline {
namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class Table {
public:
    Table(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path) {
        if (!out_) throw Error(ErrorCode::UnwritablePath, "cannot write '" + path.string() + "'");
        out_ << header << '\n';
    }
    template <typename... Fields>
    void row(const Fields&... fields) {
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << csv_field(fields)), ...);
        out_ << '\n';
    }
    std::filesystem::path close() {
        out_.close();
        if (!out_) throw Error(ErrorCode::UnwritablePath, "failed writing '" + path_.string() + "'");
        return path_;
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

std::string str(std::size_t v) { return std::to_string(v); }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string class_name(const RunRecord& r, std::size_t c) {
    return c < r.class_names.size() ? r.class_names[c] : std::to_string(c);
}

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out || !(out << text)) throw Error(ErrorCode::UnwritablePath, "cannot write '" + path.string() + "'");
    return path;
}

std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

std::string summary_svg(const std::vector<SummaryRow>& rows) {
    const double bar = 14, gap = 4, left = 260, width = 420;
    std::size_t n = 0;
    for (const auto& r : rows) n += r.record->ok ? 1 : 0;
    const double height = 40 + static_cast<double>(n) * (bar + gap);
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 80 << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<text x=\"10\" y=\"18\" font-size=\"13\">Accuracy (%)</text>\n";
    double y = 30;
    for (const auto& r : rows) {
        if (!r.record->ok) continue;
        const double acc = r.record->metrics.accuracy;
        s << "<text x=\"" << left - 6 << "\" y=\"" << y + bar - 3 << "\" text-anchor=\"end\">"
          << svg_escape(r.record->label) << "</text>\n";
        s << "<rect x=\"" << left << "\" y=\"" << y << "\" width=\"" << fixed(acc * width, 2) << "\" height=\"" << bar
          << "\" fill=\"" << (r.best ? "#c0392b" : "#2e86c1") << "\"/>\n";
        s << "<text x=\"" << left + acc * width + 4 << "\" y=\"" << y + bar - 3 << "\">" << fixed(acc * 100, 2)
          << "</text>\n";
        y += bar + gap;
    }
    s << "</svg>\n";
    return s.str();
}

std::string roc_svg(const RunRecord& r) {
    const double size = 360, pad = 40;
    static const char* colors[] = {"#2e86c1", "#c0392b", "#27ae60", "#8e44ad", "#d35400"};
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * pad + 140 << "\" height=\"" << size + 2 * pad
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << size << "\" height=\"" << size
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    s << "<line x1=\"" << pad << "\" y1=\"" << pad + size << "\" x2=\"" << pad + size << "\" y2=\"" << pad
      << "\" stroke=\"#aaa\" stroke-dasharray=\"4 3\"/>\n";
    s << "<text x=\"" << pad << "\" y=\"" << pad - 10 << "\">" << svg_escape(r.label) << "</text>\n";
    s << "<text x=\"" << pad + size / 2 << "\" y=\"" << pad + size + 28 << "\" text-anchor=\"middle\">FPR</text>\n";
    s << "<text x=\"12\" y=\"" << pad + size / 2 << "\">TPR</text>\n";
    for (std::size_t i = 0; i < r.roc.size(); ++i) {
        const auto& c = r.roc[i];
        const char* color = colors[i % 5];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : c.points) s << fixed(pad + p.fpr * size, 2) << ',' << fixed(pad + (1 - p.tpr) * size, 2) << ' ';
        s << "\"/>\n";
        s << "<text x=\"" << pad + size + 10 << "\" y=\"" << pad + 14 + 16 * static_cast<double>(i) << "\" fill=\"" << color
          << "\">" << svg_escape(class_name(r, static_cast<std::size_t>(c.class_id))) << " (AUC " << fixed(c.auc, 3)
          << ")</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    if (name == "svg") return ReportFormat::Svg;
    throw Error(ErrorCode::InvalidArgument, "unknown report format '" + std::string(name) + "' (csv, json, svg)");
}

std::string percent(double fraction) { return fixed(fraction * 100.0, 4); }

std::vector<std::filesystem::path> emit_report(const std::vector<RunRecord>& records, const std::filesystem::path& out_dir,
                                               ReportFormat format) {
    if (records.empty()) throw Error(ErrorCode::EmptyMatrix, "no records to report");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw Error(ErrorCode::UnwritablePath, "cannot create '" + out_dir.string() + "'");
    }
    const auto summary = rank_records(records);
    std::vector<std::filesystem::path> written;

    if (format == ReportFormat::Json) {
        nlohmann::json all = nlohmann::json::array();
        for (const auto& r : records) all.push_back(record_to_json(r));
        written.push_back(write_text(out_dir / "records.json", all.dump(2) + "\n"));
        return written;
    }

    if (format == ReportFormat::Svg) {
        written.push_back(write_text(out_dir / "summary.svg", summary_svg(summary)));
        for (const auto& row : summary) {
            if (row.best) written.push_back(write_text(out_dir / ("roc_" + str(row.index) + ".svg"), roc_svg(*row.record)));
        }
        return written;
    }

    {
        Table t(out_dir / "summary.csv",
                "rank,index,label,extractor,optimizer,classifier,evaluation,status,accuracy,precision,recall,f1,"
                "weighted_precision,weighted_recall,weighted_f1,best,error");
        for (const auto& row : summary) {
            const auto& r = *row.record;
            const auto& c = r.config;
            const std::string eval_mode = std::string(to_string(c.evaluation.mode)) +
                                          (c.evaluation.mode == Evaluation::Mode::KFold ? "(" + str(c.evaluation.k) + ")" : "");
            if (r.ok) {
                t.row(str(row.rank), str(r.index), r.label, c.extractor_tag, std::string(to_string(c.optimizer.kind)),
                      std::string(learn::to_string(c.classifier.kind())), eval_mode, std::string("ok"),
                      percent(r.metrics.accuracy), percent(r.metrics.precision), percent(r.metrics.recall),
                      percent(r.metrics.f1), percent(r.metrics_weighted.precision), percent(r.metrics_weighted.recall),
                      percent(r.metrics_weighted.f1), std::string(row.best ? "1" : "0"), std::string());
            } else {
                t.row(std::string(), str(r.index), r.label, c.extractor_tag, std::string(to_string(c.optimizer.kind)),
                      std::string(learn::to_string(c.classifier.kind())), eval_mode, std::string("failed"),
                      std::string(), std::string(), std::string(), std::string(), std::string(), std::string(),
                      std::string(), std::string("0"), r.error);
            }
        }
        written.push_back(t.close());
    }
    {
        Table t(out_dir / "per_fold.csv", "index,label,fold,accuracy,precision,recall,f1");
        for (const auto& r : records) {
            if (!r.ok) continue;
            for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
                const auto& m = r.per_fold[f];
                t.row(str(r.index), r.label, str(f + 1), percent(m.accuracy), percent(m.precision), percent(m.recall),
                      percent(m.f1));
            }
            t.row(str(r.index), r.label, std::string(r.per_fold.empty() ? "holdout" : "mean"), percent(r.metrics.accuracy),
                  percent(r.metrics.precision), percent(r.metrics.recall), percent(r.metrics.f1));
        }
        written.push_back(t.close());
    }
    {
        Table t(out_dir / "roc.csv", "index,label,class_id,class_name,point,fpr,tpr,threshold,auc");
        for (const auto& r : records) {
            for (const auto& c : r.roc) {
                for (std::size_t p = 0; p < c.points.size(); ++p) {
                    const auto& pt = c.points[p];
                    t.row(str(r.index), r.label, std::to_string(c.class_id), class_name(r, static_cast<std::size_t>(c.class_id)),
                          str(p), data::format_double(pt.fpr), data::format_double(pt.tpr),
                          std::isfinite(pt.threshold) ? data::format_double(pt.threshold) : std::string("inf"),
                          data::format_double(c.auc));
                }
            }
        }
        written.push_back(t.close());
    }
    {
        Table t(out_dir / "confusion.csv", "index,label,true_class,predicted_class,count");
        for (const auto& r : records) {
            for (std::size_t i = 0; i < r.confusion.n_classes; ++i) {
                for (std::size_t k = 0; k < r.confusion.n_classes; ++k) {
                    t.row(str(r.index), r.label, class_name(r, i), class_name(r, k), std::to_string(r.confusion.at(i, k)));
                }
            }
        }
        written.push_back(t.close());
    }
    if (std::any_of(records.begin(), records.end(), [](const RunRecord& r) { return !r.curve.empty(); })) {
        Table t(out_dir / "learning_curve.csv",
                "index,label,fraction,n_samples,accuracy_mean,accuracy_std,precision_mean,precision_std,recall_mean,"
                "recall_std,f1_mean,f1_std");
        for (const auto& r : records) {
            for (const auto& c : r.curve) {
                t.row(str(r.index), r.label, data::format_double(c.fraction), str(c.n_samples), percent(c.accuracy.mean),
                      percent(c.accuracy.std), percent(c.precision.mean), percent(c.precision.std), percent(c.recall.mean),
                      percent(c.recall.std), percent(c.f1.mean), percent(c.f1.std));
            }
        }
        written.push_back(t.close());
    }
    if (std::any_of(records.begin(), records.end(), [](const RunRecord& r) { return r.bench.has_value(); })) {
        Table t(out_dir / "bench.csv", "index,label,time_mean_ms,time_std_ms,peak_mib,incremental_mib,time,memory,mechanism");
        for (const auto& r : records) {
            if (!r.bench) continue;
            const auto& b = *r.bench;
            t.row(str(r.index), r.label, fixed(b.time_mean * 1e3, 3), fixed(b.time_std * 1e3, 3),
                  fixed(static_cast<double>(b.peak_memory) / 1048576.0, 2),
                  fixed(static_cast<double>(b.incremental_memory) / 1048576.0, 2), b.time_text(), b.memory_text(),
                  b.mechanism);
        }
        written.push_back(t.close());
    }
    return written;
}

std::vector<RunRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read records '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptPayload, "records file is not valid JSON: " + std::string(e.what()));
    }
    std::vector<RunRecord> out;
    if (j.is_object()) j = nlohmann::json::array({j});
    for (const auto& r : j) out.push_back(record_from_json(r));
    return out;
}

}  // namespace strokeml::pipeline
