#include "kdlab/report.hpp"

#include <fstream>
#include <sstream>

#include "kdlab/errors.hpp"

namespace kdlab {

using nlohmann::ordered_json;

const ArmResult* ExperimentReport::find_arm(const std::string& arm,
                                            std::uint64_t seed) const {
    for (const ArmResult& a : arms) {
        if (a.arm == arm && a.seed == seed) return &a;
    }
    return nullptr;
}

const ComparisonResult* ExperimentReport::find_comparison(const std::string& name,
                                                          std::uint64_t seed) const {
    for (const ComparisonResult& c : comparisons) {
        if (c.name == name && c.seed == seed) return &c;
    }
    return nullptr;
}

ordered_json report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["run_id"] = report.run_id;
    j["seeds"] = report.seeds;
    j["dataset"] = report.dataset_desc;
    j["arms"] = ordered_json::array();
    for (const ArmResult& a : report.arms) {
        ordered_json ja;
        ja["arm"] = a.arm;
        ja["seed"] = a.seed;
        ja["best_acc"] = a.best_acc;
        ja["final_acc"] = a.final_acc;
        ja["epochs"] = a.epochs;
        ja["skipped"] = a.skipped;
        ja["error"] = a.error;
        j["arms"].push_back(std::move(ja));
    }
    j["predicates"] = ordered_json::array();
    for (const PredicateResult& p : report.predicates) {
        ordered_json jp;
        jp["name"] = p.name;
        jp["seed"] = p.seed;
        jp["value"] = p.value;
        j["predicates"].push_back(std::move(jp));
    }
    j["comparisons"] = ordered_json::array();
    for (const ComparisonResult& c : report.comparisons) {
        ordered_json jc;
        jc["name"] = c.name;
        jc["seed"] = c.seed;
        jc["mean_kl"] = c.mean_kl;
        jc["mean_peaks"] = c.mean_peaks;
        j["comparisons"].push_back(std::move(jc));
    }
    j["wall_seconds"] = report.wall_seconds;
    j["config"] = report.config_snapshot;
    return j;
}

ExperimentReport report_from_json(const ordered_json& j) {
    try {
        ExperimentReport r;
        r.run_id = j.at("run_id").get<std::string>();
        r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        r.dataset_desc = j.at("dataset").get<std::string>();
        for (const auto& ja : j.at("arms")) {
            ArmResult a;
            a.arm = ja.at("arm").get<std::string>();
            a.seed = ja.at("seed").get<std::uint64_t>();
            a.best_acc = ja.at("best_acc").get<double>();
            a.final_acc = ja.at("final_acc").get<double>();
            a.epochs = ja.at("epochs").get<int>();
            a.skipped = ja.at("skipped").get<bool>();
            a.error = ja.at("error").get<std::string>();
            r.arms.push_back(std::move(a));
        }
        for (const auto& jp : j.at("predicates")) {
            PredicateResult p;
            p.name = jp.at("name").get<std::string>();
            p.seed = jp.at("seed").get<std::uint64_t>();
            p.value = jp.at("value").get<bool>();
            r.predicates.push_back(std::move(p));
        }
        for (const auto& jc : j.at("comparisons")) {
            ComparisonResult c;
            c.name = jc.at("name").get<std::string>();
            c.seed = jc.at("seed").get<std::uint64_t>();
            c.mean_kl = jc.at("mean_kl").get<double>();
            c.mean_peaks = jc.at("mean_peaks").get<double>();
            r.comparisons.push_back(std::move(c));
        }
        r.wall_seconds = j.at("wall_seconds").get<double>();
        r.config_snapshot = j.at("config");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("report parse error: ") + e.what());
    }
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "seed,arm,best_acc,final_acc,epochs,skipped,error\n";
    out.precision(17);
    for (const ArmResult& a : report.arms) {
        out << a.seed << ',' << csv_escape(a.arm) << ',' << a.best_acc << ','
            << a.final_acc << ',' << a.epochs << ',' << (a.skipped ? 1 : 0) << ','
            << csv_escape(a.error) << '\n';
    }
    return out.str();
}

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    if (format == ReportFormat::json) {
        out << report_to_json(report).dump(2) << '\n';
    } else {
        out << report_to_csv(report);
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace kdlab
