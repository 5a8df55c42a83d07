#pragma once

#include <string>
#include <vector>

namespace egtw::pipeline {

struct VariantRun {
    std::string name;    // e.g. full, no_mr, no_im, no_ad
    std::string run_dir; // stage-3 run directory holding eval.csv
};

// Comparison table over configured variants: one row per variant with the full
// metric column set (video-quality columns are n/a without pretrained
// featurizers). Missing runs are listed as missing, never fabricated. The
// output is a pure function of the stored CSVs.
void write_report(const std::vector<VariantRun>& runs, const std::string& out_dir);

} // namespace egtw::pipeline
