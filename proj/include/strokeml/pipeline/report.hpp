#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "strokeml/pipeline/run.hpp"

namespace strokeml::pipeline {

enum class ReportFormat { Csv, Json, Svg };

ReportFormat parse_report_format(std::string_view name);

// CSV tables written by emit_report (metric columns are percentages):
//
//   summary.csv         rank,index,label,extractor,optimizer,classifier,evaluation,status,
//                       accuracy,precision,recall,f1,weighted_precision,weighted_recall,weighted_f1,best,error
//   per_fold.csv        index,label,fold,accuracy,precision,recall,f1   (fold "mean" closes each record)
//   roc.csv             index,label,class_id,class_name,point,fpr,tpr,threshold,auc
//   confusion.csv       index,label,true_class,predicted_class,count
//   learning_curve.csv  index,label,fraction,n_samples,{accuracy,precision,recall,f1}_{mean,std}
//   bench.csv           index,label,time_mean_ms,time_std_ms,peak_mib,incremental_mib,time,memory,mechanism
//
// JSON writes records.json. SVG writes summary.svg (accuracy bars) and
// roc_<index>.svg for the best record.

/// Returns the files written. Throws UnwritablePath, or EmptyMatrix for no records.
std::vector<std::filesystem::path> emit_report(const std::vector<RunRecord>& records, const std::filesystem::path& out_dir,
                                               ReportFormat format);

/// Reads a records.json written by emit_report.
std::vector<RunRecord> load_records(const std::filesystem::path& path);

/// Percent with four decimals, as used in the CSV tables.
std::string percent(double fraction);

}  // namespace strokeml::pipeline
