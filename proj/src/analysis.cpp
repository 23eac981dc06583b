#include "etcnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "etcnet/csv.hpp"

namespace etcnet {

// ---------------------------------------------------------------------------
// PCA.

SymEigen jacobi_eigen_sym(const std::vector<std::vector<double>>& matrix) {
  const int d = static_cast<int>(matrix.size());
  for (const auto& row : matrix)
    if (static_cast<int>(row.size()) != d) throw std::invalid_argument("matrix must be square");

  std::vector<std::vector<double>> a = matrix;
  std::vector<std::vector<double>> v(d, std::vector<double>(d, 0.0));
  for (int i = 0; i < d; ++i) v[i][i] = 1.0;

  double frob = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) frob += a[i][j] * a[i][j];
  frob = std::sqrt(frob);
  const double tol = 1e-10 * std::max(1.0, frob);

  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) s += a[i][j] * a[i][j];
    return std::sqrt(2.0 * s);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        if (std::abs(a[p][q]) <= tol / (d * d + 1.0)) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < d; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  SymEigen out;
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });
  out.values.resize(d);
  out.vectors.assign(d, std::vector<double>(d, 0.0));
  for (int r = 0; r < d; ++r) {
    const int src = order[r];
    out.values[r] = a[src][src];
    for (int k = 0; k < d; ++k) out.vectors[r][k] = v[k][src];
    // Deterministic sign: the largest-magnitude component is positive.
    int big = 0;
    for (int k = 1; k < d; ++k)
      if (std::abs(out.vectors[r][k]) > std::abs(out.vectors[r][big])) big = k;
    if (out.vectors[r][big] < 0.0)
      for (double& x : out.vectors[r]) x = -x;
  }
  return out;
}

Pca2d pca2d(const std::vector<std::vector<double>>& observations, const std::vector<int>& gates) {
  if (observations.size() < 3) throw std::invalid_argument("pca2d needs at least 3 observations");
  const std::size_t d = observations.front().size();
  for (const auto& o : observations)
    if (o.size() != d) throw std::invalid_argument("observations have inconsistent lengths");
  if (!gates.empty() && gates.size() != observations.size())
    throw std::invalid_argument("gates must pair 1:1 with observations");

  std::vector<double> mean(d, 0.0);
  for (const auto& o : observations)
    for (std::size_t k = 0; k < d; ++k) mean[k] += o[k];
  for (double& m : mean) m /= static_cast<double>(observations.size());

  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& o : observations)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov[i][j] += (o[i] - mean[i]) * (o[j] - mean[j]);
  for (auto& row : cov)
    for (double& x : row) x /= static_cast<double>(observations.size());

  const SymEigen eig = jacobi_eigen_sym(cov);

  Pca2d out;
  out.gates = gates;
  for (std::size_t k = 0; k < d; ++k) out.total_variance += cov[k][k];
  out.explained = {eig.values[0], d > 1 ? eig.values[1] : 0.0};
  out.points.reserve(observations.size());
  for (const auto& o : observations) {
    std::array<double, 2> p{0.0, 0.0};
    for (std::size_t k = 0; k < d; ++k) {
      const double centered = o[k] - mean[k];
      p[0] += centered * eig.vectors[0][k];
      if (d > 1) p[1] += centered * eig.vectors[1][k];
    }
    out.points.push_back(p);
  }
  return out;
}

void write_pca_csv(const Pca2d& pca, const std::filesystem::path& path) {
  CsvWriter csv(path, {"x", "y", "gate"});
  for (std::size_t i = 0; i < pca.points.size(); ++i) {
    const int gate = pca.gates.empty() ? -1 : pca.gates[i];
    csv.row({fmt_double(pca.points[i][0]), fmt_double(pca.points[i][1]), std::to_string(gate)});
  }
}

// ---------------------------------------------------------------------------
// SVG helpers.

namespace {

constexpr int kWidth = 800, kHeight = 500;
constexpr int kMarginLeft = 70, kMarginRight = 20, kMarginTop = 20, kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Range {
  double lo = 0.0, hi = 1.0;
  double map(double v, double pix_lo, double pix_hi) const {
    const double f = (v - lo) / (hi - lo);
    return pix_lo + f * (pix_hi - pix_lo);
  }
};

// Data extent plus a 5% margin on each side; degenerate extents pad by 1.
Range padded_range(double lo, double hi) {
  if (!(hi > lo)) return Range{lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return Range{lo - pad, hi + pad};
}

std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void svg_open(std::ofstream& out, const std::string& xlabel, const std::string& ylabel,
              const Range& xr, const Range& yr) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"14\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" font-size=\"14\" "
      << "transform=\"rotate(-90 16 " << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";
  // Extent ticks.
  out << "<text x=\"" << x0 << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << svg_num(xr.lo) << "</text>\n";
  out << "<text x=\"" << x1 << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << svg_num(xr.hi) << "</text>\n";
  out << "<text x=\"" << x0 - 6 << "\" y=\"" << y0 << "\" text-anchor=\"end\" font-size=\"11\">"
      << svg_num(yr.lo) << "</text>\n";
  out << "<text x=\"" << x0 - 6 << "\" y=\"" << y1 + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << svg_num(yr.hi) << "</text>\n";
}

double px(const Range& xr, double v) { return xr.map(v, kMarginLeft, kWidth - kMarginRight); }
double py(const Range& yr, double v) { return yr.map(v, kHeight - kMarginBottom, kMarginTop); }

}  // namespace

void write_pca_svg(const Pca2d& pca, const std::filesystem::path& path) {
  double xlo = pca.points[0][0], xhi = xlo, ylo = pca.points[0][1], yhi = ylo;
  for (const auto& p : pca.points) {
    xlo = std::min(xlo, p[0]);
    xhi = std::max(xhi, p[0]);
    ylo = std::min(ylo, p[1]);
    yhi = std::max(yhi, p[1]);
  }
  const Range xr = padded_range(xlo, xhi), yr = padded_range(ylo, yhi);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  svg_open(out, "pc1", "pc2", xr, yr);
  for (std::size_t i = 0; i < pca.points.size(); ++i) {
    const bool solid = !pca.gates.empty() && pca.gates[i] == 1;
    out << "<circle cx=\"" << svg_num(px(xr, pca.points[i][0])) << "\" cy=\""
        << svg_num(py(yr, pca.points[i][1])) << "\" r=\"4\" stroke=\"" << kPalette[0] << "\" fill=\""
        << (solid ? kPalette[0] : "none") << "\"/>\n";
  }
  out << "</svg>\n";
}

std::vector<std::filesystem::path> render_curves(const std::vector<std::filesystem::path>& csv_paths,
                                                 const std::vector<std::string>& keys,
                                                 const std::filesystem::path& out_dir) {
  if (csv_paths.empty()) throw std::invalid_argument("no input CSVs");
  if (keys.empty()) throw std::invalid_argument("no keys to plot");

  std::vector<CsvTable> tables;
  std::vector<std::string> names;
  for (const auto& p : csv_paths) {
    tables.push_back(CsvTable::read(p));
    names.push_back(p.stem().string());
  }
  for (const auto& t : tables)
    if (t.header != tables.front().header) throw std::runtime_error("input CSVs do not share a schema");

  std::string available;
  for (const auto& h : tables.front().header) available += (available.empty() ? "" : ", ") + h;

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const std::string& key : keys) {
    if (tables.front().column_index(key) < 0)
      throw std::runtime_error("no such metric key: " + key + " (available: " + available + ")");

    std::vector<std::vector<double>> xs, ys;
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    bool any = false;
    for (const auto& t : tables) {
      xs.push_back(t.column("step"));
      ys.push_back(t.column(key));
      for (std::size_t i = 0; i < xs.back().size(); ++i) {
        if (!any) {
          xlo = xhi = xs.back()[i];
          ylo = yhi = ys.back()[i];
          any = true;
        } else {
          xlo = std::min(xlo, xs.back()[i]);
          xhi = std::max(xhi, xs.back()[i]);
          ylo = std::min(ylo, ys.back()[i]);
          yhi = std::max(yhi, ys.back()[i]);
        }
      }
    }
    if (!any) throw std::runtime_error("input CSVs contain no data rows");
    const Range xr = padded_range(xlo, xhi), yr = padded_range(ylo, yhi);

    const std::filesystem::path svg_path = out_dir / ("curve_" + key + ".svg");
    std::ofstream out(svg_path);
    if (!out) throw std::runtime_error("cannot write " + svg_path.string());
    svg_open(out, "step", key, xr, yr);
    for (std::size_t run = 0; run < tables.size(); ++run) {
      const char* color = kPalette[run % (sizeof kPalette / sizeof kPalette[0])];
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < xs[run].size(); ++i) {
        if (i) out << ' ';
        out << svg_num(px(xr, xs[run][i])) << ',' << svg_num(py(yr, ys[run][i]));
      }
      out << "\"/>\n";
      // legend
      const int ly = kMarginTop + 16 * static_cast<int>(run);
      out << "<line x1=\"" << kWidth - 180 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - 160
          << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << kWidth - 155 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << names[run]
          << "</text>\n";
    }
    out << "</svg>\n";
    written.push_back(svg_path);

    const std::filesystem::path merged_path = out_dir / ("curve_" + key + ".csv");
    CsvWriter merged(merged_path, {"run", "step", key});
    for (std::size_t run = 0; run < tables.size(); ++run)
      for (std::size_t i = 0; i < xs[run].size(); ++i)
        merged.row({names[run], fmt_double(xs[run][i]), fmt_double(ys[run][i])});
    written.push_back(merged_path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// Gating timeline.

std::vector<TimelineRow> gating_timeline(const std::vector<DumpRow>& dump) {
  std::vector<TimelineRow> rows;
  for (const DumpRow& step : dump) {
    const int n = static_cast<int>(step.gates.size());
    for (int i = 0; i < n; ++i) {
      TimelineRow row;
      row.t = step.t;
      row.episode = step.episode;
      row.ep_t = step.ep_t;
      row.agent = i;
      row.gate = step.gates[i];
      row.forced = step.ep_t == 0;
      if (step.info.contains("reached")) row.reached_dest = step.info.at("reached").at(i).get<bool>();
      if (step.info.contains("dest_moved") && n == 2)
        row.observed_dest_moved = step.info.at("dest_moved").at(1 - i).get<bool>();
      if (step.info.contains("prey_visible"))
        row.prey_visible = step.info.at("prey_visible").at(i).get<bool>();
      rows.push_back(row);
    }
  }
  return rows;
}

void write_timeline_csv(const std::vector<TimelineRow>& rows, const std::filesystem::path& path) {
  CsvWriter csv(path, {"t", "episode", "ep_t", "agent", "gate", "forced", "reached_dest",
                       "observed_dest_moved", "prey_visible"});
  for (const TimelineRow& r : rows)
    csv.row({std::to_string(r.t), std::to_string(r.episode), std::to_string(r.ep_t),
             std::to_string(r.agent), std::to_string(r.gate), std::to_string(r.forced ? 1 : 0),
             std::to_string(r.reached_dest ? 1 : 0), std::to_string(r.observed_dest_moved ? 1 : 0),
             std::to_string(r.prey_visible ? 1 : 0)});
}

}  // namespace etcnet
