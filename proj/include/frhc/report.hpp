#pragma once

// CSV export, atomic file writes and generated matplotlib scripts.

#include <filesystem>
#include <string>
#include <vector>

#include "frhc/hybridsim.hpp"

namespace frhc {

/// 17 significant digits, enough to round-trip any double.
std::string formatDouble(double v);

/// Header: t,y,u,e,r,xc_0..,xp_0..,active_subsystem.
std::string traceCsv(const SimulationTrace& trace);
/// Header: time,sample,pre_0..,post_0..
std::string eventsCsv(const SimulationTrace& trace);

/// Write to a sibling temp file then rename over the target.
void writeFileAtomic(const std::filesystem::path& path, const std::string& content);

struct PlotSeries {
    std::string csv;    // path relative to the script
    std::string label;
};

struct PlotFigure {
    std::string name;   // output image stem
    std::string title;
    std::string column = "y";
    std::vector<PlotSeries> series;
    /// Draw the reference column of the first series as a dashed line.
    bool showReference = true;
};

struct PlotStyle {
    double width = 6.4;
    double height = 4.0;
    int dpi = 120;
    std::string format = "png";
};

/// Self-contained Python script (numpy + matplotlib) reading the CSVs;
/// byte-identical for identical inputs. Throws on an empty figure list.
std::string exportPlotScript(const std::vector<PlotFigure>& figures, const PlotStyle& style = {});

}  // namespace frhc
