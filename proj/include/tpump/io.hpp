#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace tp {

std::string sha256_file(const std::filesystem::path& p);

// fixed-format number for CSV output
std::string fmt_num(double v);

void write_text(const std::filesystem::path& p, const std::string& content);

// Heatmap as standalone SVG, plus the same data as CSV next to it (path with .csv).
// Colour: value scaled to [min, max] then linear from #ffffff (min) to #08306b (max).
void emit_heatmap(const Eigen::MatrixXd& m, const std::filesystem::path& svg_path, const std::string& title = "");

}  // namespace tp
