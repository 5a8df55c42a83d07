#include "egtw/pipeline/report.hpp"

#include <filesystem>

#include "egtw/core/error.hpp"
#include "egtw/core/table.hpp"

namespace egtw::pipeline {

void write_report(const std::vector<VariantRun>& runs, const std::string& out_dir) {
    if (runs.empty()) throw ValidationError("report: no runs given");
    std::filesystem::create_directories(out_dir);

    CsvTable out;
    out.header = {"variant",  "i_fid",  "fvd",       "clip_sim", "m_fid",
                  "r_prec",   "mm_dist", "trans_err", "rot_err",  "hand_score"};

    std::vector<std::string> bar_labels;
    std::vector<double> bar_values;

    for (const auto& run : runs) {
        const std::string eval_path = run.run_dir + "/eval.csv";
        if (!std::filesystem::exists(eval_path)) {
            out.rows.push_back({run.name, "missing", "missing", "missing", "missing", "missing", "missing",
                                "missing", "missing", "missing"});
            continue;
        }
        const CsvTable eval = CsvTable::load(eval_path);
        if (eval.rows.empty()) throw FormatError("empty eval table: " + eval_path);
        const auto& last = eval.rows.back(); // final cadence point
        auto col = [&](const char* name) -> std::string {
            const int idx = eval.column(name);
            return idx >= 0 ? last[static_cast<std::size_t>(idx)] : "n/a";
        };
        // image/video featurizers are not part of the desk-scale build
        out.rows.push_back({run.name, "n/a", "n/a", "n/a", col("m_fid"), col("r_prec"), col("mm_dist"),
                            col("trans_err"), col("rot_err"), col("hand_score")});
        const std::string te = col("trans_err");
        if (te != "n/a" && te != "missing") {
            bar_labels.push_back(run.name);
            bar_values.push_back(std::stod(te));
        }
    }

    out.save(out_dir + "/comparison.csv");
    if (!bar_labels.empty())
        write_svg_bar_plot(out_dir + "/trans_err.svg", "translation error by variant", bar_labels, bar_values);
}

} // namespace egtw::pipeline
