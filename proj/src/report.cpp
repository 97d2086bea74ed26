#include "frhc/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace frhc {

namespace {

std::string pyString(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\\' || c == '\'') out += '\\';
        out += c;
    }
    return out + "'";
}

}  // namespace

std::string formatDouble(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string traceCsv(const SimulationTrace& tr) {
    std::string out = "t,y,u,e,r";
    for (std::size_t i = 0; i < tr.controllerStates.size(); ++i) out += ",xc_" + std::to_string(i);
    for (std::size_t i = 0; i < tr.plantStates.size(); ++i) out += ",xp_" + std::to_string(i);
    out += ",active_subsystem\n";
    for (std::size_t k = 0; k < tr.size(); ++k) {
        out += formatDouble(tr.t[k]);
        for (double v : {tr.y[k], tr.u[k], tr.e[k], tr.r[k]}) out += ',' + formatDouble(v);
        for (const auto& col : tr.controllerStates) out += ',' + formatDouble(col[k]);
        for (const auto& col : tr.plantStates) out += ',' + formatDouble(col[k]);
        out += ',' + std::to_string(tr.active.empty() ? 0 : tr.active[k]) + '\n';
    }
    return out;
}

std::string eventsCsv(const SimulationTrace& tr) {
    const std::size_t n = tr.events.empty() ? tr.controllerStates.size() : tr.events.front().pre.size();
    std::string out = "time,sample";
    for (std::size_t i = 0; i < n; ++i) out += ",pre_" + std::to_string(i);
    for (std::size_t i = 0; i < n; ++i) out += ",post_" + std::to_string(i);
    out += '\n';
    for (const auto& ev : tr.events) {
        out += formatDouble(ev.time) + ',' + std::to_string(ev.sample);
        for (double v : ev.pre) out += ',' + formatDouble(v);
        for (double v : ev.post) out += ',' + formatDouble(v);
        out += '\n';
    }
    return out;
}

void writeFileAtomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path);
}

std::string exportPlotScript(const std::vector<PlotFigure>& figures, const PlotStyle& requested) {
    if (figures.empty()) throw std::invalid_argument("plot script needs at least one figure");
    // Unset fields fall back to the defaults.
    const PlotStyle defaults;
    PlotStyle style = requested;
    if (style.format.empty()) style.format = defaults.format;
    if (!(style.width > 0.0)) style.width = defaults.width;
    if (!(style.height > 0.0)) style.height = defaults.height;
    if (style.dpi <= 0) style.dpi = defaults.dpi;
    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
         "# Generated by frhc. Run from any directory; paths are relative to this file.\n"
         "import os\n"
         "import numpy as np\n"
         "import matplotlib\n"
         "matplotlib.use('Agg')\n"
         "import matplotlib.pyplot as plt\n\n"
         "HERE = os.path.dirname(os.path.abspath(__file__))\n\n\n"
         "def load(name):\n"
         "    return np.genfromtxt(os.path.join(HERE, name), delimiter=',', names=True)\n\n\n";
    for (const auto& f : figures) {
        if (f.series.empty()) throw std::invalid_argument("figure '" + f.name + "' has no series");
        s << "fig, ax = plt.subplots(figsize=(" << formatDouble(style.width) << ", " << formatDouble(style.height) << "))\n";
        for (const auto& sr : f.series) {
            s << "d = load(" << pyString(sr.csv) << ")\n"
              << "ax.plot(d['t'], d[" << pyString(f.column) << "], label=" << pyString(sr.label) << ")\n";
        }
        if (f.showReference) {
            s << "d = load(" << pyString(f.series.front().csv) << ")\n"
              << "ax.plot(d['t'], d['r'], 'k--', linewidth=0.8, label='reference')\n";
        }
        s << "ax.set_xlabel('t [s]')\n"
          << "ax.set_ylabel(" << pyString(f.column) << ")\n"
          << "ax.set_title(" << pyString(f.title) << ")\n"
          << "ax.grid(True)\n"
          << "ax.legend()\n"
          << "fig.tight_layout()\n"
          << "fig.savefig(os.path.join(HERE, " << pyString(f.name + "." + style.format) << "), dpi=" << style.dpi << ")\n"
          << "plt.close(fig)\n\n";
    }
    return s.str();
}

}  // namespace frhc
