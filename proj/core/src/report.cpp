#include "frodo/report.hpp"

#include <fstream>

#include <json.hpp>

#include "frodo/error.hpp"
#include "frodo/scores_csv.hpp"

namespace frodo {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const OperatingPoint& op) {
  return ordered_json{{"threshold", op.threshold},
                      {"sensitivity_target", op.sensitivity_target},
                      {"tp", op.confusion.tp},
                      {"fp", op.confusion.fp},
                      {"tn", op.confusion.tn},
                      {"fn", op.confusion.fn}};
}

void write_json(const ordered_json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed on " + path.string());
}

}  // namespace

void write_roc_csv(const RocResult& roc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << "fpr,tpr,threshold\n";
  for (const auto& p : roc.points) {
    out << format_number(p.fpr) << ',' << format_number(p.tpr) << ',' << format_number(p.threshold)
        << '\n';
  }
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed on " + path.string());
}

std::vector<std::filesystem::path> emit_report(
    const std::map<std::string, RocResult>& per_method,
    const std::map<std::string, OperatingPoint>& operating_points, const ReportConfig& config,
    const std::filesystem::path& report_path, const std::filesystem::path& roc_dir) {
  if (per_method.empty()) fail(ErrorCode::InvalidArgument, "report needs at least one method");

  ordered_json doc;
  doc["methods"] = ordered_json::object();
  for (const auto& [name, roc] : per_method) {
    doc["methods"][name] = {{"auc", roc.auc}, {"n_in", roc.n_in}, {"n_ood", roc.n_ood}};
  }
  doc["operating_points"] = ordered_json::object();
  for (const auto& [name, op] : operating_points) doc["operating_points"][name] = to_json(op);
  doc["config"] = {{"scores", config.scores_path},
                   {"sensitivity_target", config.sensitivity_target},
                   {"positive_class", "ood"},
                   {"decision_rule", "score >= threshold"},
                   {"tie_policy", "mann_whitney_half"}};
  if (!config.fusion_rule.empty()) doc["config"]["fusion_rule"] = config.fusion_rule;

  std::vector<std::filesystem::path> written;
  if (!roc_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(roc_dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + roc_dir.string() + ": " + ec.message());
    for (const auto& [name, roc] : per_method) {
      const auto path = roc_dir / ("roc_" + name + ".csv");
      write_roc_csv(roc, path);
      written.push_back(path);
    }
  }
  if (!report_path.parent_path().empty()) {
    std::error_code ec;
    std::filesystem::create_directories(report_path.parent_path(), ec);
  }
  write_json(doc, report_path);
  return written;
}

void append_operating_points(const std::filesystem::path& report_path,
                             const std::map<std::string, OperatingPoint>& operating_points) {
  ordered_json doc;
  if (std::filesystem::exists(report_path)) {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + report_path.string());
    try {
      doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::FormatError, report_path.string() + ": " + e.what());
    }
  } else {
    doc["methods"] = ordered_json::object();
  }
  if (!doc.contains("operating_points")) doc["operating_points"] = ordered_json::object();
  for (const auto& [name, op] : operating_points) doc["operating_points"][name] = to_json(op);
  write_json(doc, report_path);
}

}  // namespace frodo
