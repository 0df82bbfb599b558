#include "dac/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>

#include "dac/errors.hpp"

namespace dac {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// Round the raw span out to a tidy tick step of shape {1, 2, 5} * 10^k.
double tick_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  if (frac <= 1.0) return mag;
  if (frac <= 2.0) return 2.0 * mag;
  if (frac <= 5.0) return 5.0 * mag;
  return 10.0 * mag;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double span() const { return hi - lo; }
};

Range data_range(const std::vector<Series>& series, bool use_x) {
  Range r{std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  for (const Series& s : series) {
    const auto& vals = use_x ? s.x : s.y;
    for (double v : vals) {
      if (!std::isfinite(v)) continue;
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  }
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) return {0.0, 1.0};
  if (r.span() <= 0.0) {
    const double pad = std::max(1.0, std::abs(r.lo));
    return {r.lo - 0.5 * pad, r.hi + 0.5 * pad};
  }
  const double pad = 0.04 * r.span();
  return {r.lo - pad, r.hi + pad};
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_line_chart(const std::string& path, const ChartSpec& spec,
                      const std::vector<Series>& series) {
  const int ml = 64, mr = 16, mt = 34, mb = 46;
  const double pw = spec.width - ml - mr;
  const double ph = spec.height - mt - mb;
  const Range rx = data_range(series, true);
  const Range ry = data_range(series, false);
  auto sx = [&](double x) { return ml + (x - rx.lo) / rx.span() * pw; };
  auto sy = [&](double y) { return mt + (ry.hi - y) / ry.span() * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" viewBox=\"0 0 " +
         std::to_string(spec.width) + " " + std::to_string(spec.height) +
         "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + std::to_string(spec.width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" +
         escape(spec.title) + "</text>\n";

  // Frame and grid.
  out += "<rect x=\"" + std::to_string(ml) + "\" y=\"" + std::to_string(mt) +
         "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
  const double tx = tick_step(rx.span());
  for (double v = std::ceil(rx.lo / tx) * tx; v <= rx.hi + 1e-9 * tx; v += tx) {
    const double px = sx(v);
    out += "<line x1=\"" + fmt(px) + "\" y1=\"" + std::to_string(mt) +
           "\" x2=\"" + fmt(px) + "\" y2=\"" +
           std::to_string(spec.height - mb) +
           "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
    out += "<text x=\"" + fmt(px) + "\" y=\"" +
           std::to_string(spec.height - mb + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt(v) + "</text>\n";
  }
  const double ty = tick_step(ry.span());
  for (double v = std::ceil(ry.lo / ty) * ty; v <= ry.hi + 1e-9 * ty; v += ty) {
    const double py = sy(v);
    out += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + fmt(py) +
           "\" x2=\"" + std::to_string(spec.width - mr) + "\" y2=\"" +
           fmt(py) + "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
    out += "<text x=\"" + std::to_string(ml - 6) + "\" y=\"" + fmt(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt(v) + "</text>\n";
  }
  out += "<text x=\"" + std::to_string(ml + static_cast<int>(pw) / 2) +
         "\" y=\"" + std::to_string(spec.height - 8) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         escape(spec.x_label) + "</text>\n";
  out += "<text x=\"14\" y=\"" + std::to_string(mt + static_cast<int>(ph) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 14 " +
         std::to_string(mt + static_cast<int>(ph) / 2) + ")\">" +
         escape(spec.y_label) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kPalette[si % 6];
    std::string points;
    bool open = false;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    auto flush = [&]() {
      if (open && !points.empty()) {
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
      }
      points.clear();
      open = false;
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      points += fmt(sx(s.x[i])) + "," + fmt(sy(s.y[i])) + " ";
      open = true;
    }
    flush();

    const int lx = ml + 10;
    const int ly = mt + 16 + 16 * static_cast<int>(si);
    out += "<line x1=\"" + std::to_string(lx) + "\" y1=\"" +
           std::to_string(ly - 4) + "\" x2=\"" + std::to_string(lx + 22) +
           "\" y2=\"" + std::to_string(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + std::to_string(lx + 28) + "\" y=\"" +
           std::to_string(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open '" + path + "' for writing");
  f << out;
}

namespace {

Series trace(const std::vector<RunRecord>& rec, const std::string& label,
             const std::function<double(const RunRecord&)>& f, int stride) {
  Series s;
  s.label = label;
  s.x.reserve(rec.size() / stride + 1);
  s.y.reserve(rec.size() / stride + 1);
  for (std::size_t i = 0; i < rec.size(); i += stride) {
    s.x.push_back(rec[i].t);
    s.y.push_back(f(rec[i]));
  }
  return s;
}

// Keeps only rows where f yields a finite value (sparse snapshot columns).
Series sparse_trace(const std::vector<RunRecord>& rec, const std::string& label,
                    const std::function<double(const RunRecord&)>& f) {
  Series s;
  s.label = label;
  for (const RunRecord& r : rec) {
    const double y = f(r);
    if (!std::isfinite(y)) continue;
    s.x.push_back(r.t);
    s.y.push_back(y);
  }
  return s;
}

}  // namespace

void write_run_plots(const std::string& dir, const RunResult& primary,
                     const RunResult* comparison) {
  const auto& rec = primary.records;
  if (rec.empty()) {
    std::fprintf(stderr, "warning: run produced no records, skipping plots\n");
    return;
  }
  // Stride the 200 Hz traces down to roughly 2000 points per series.
  const int stride = std::max<int>(1, static_cast<int>(rec.size() / 2000));
  const std::string tag = mode_name(primary.mode);
  static const char* kTwist[6] = {"u", "v", "w", "p", "q", "r"};
  static const char* kAct[4] = {"thrust", "rudder", "aileron", "elevator"};

  std::vector<Series> fig1;
  for (int i = 0; i < 6; ++i) {
    fig1.push_back(trace(
        rec, tag + " " + kTwist[i],
        [i](const RunRecord& r) { return r.v_err[i]; }, stride));
  }
  if (comparison) {
    const int cs =
        std::max<int>(1, static_cast<int>(comparison->records.size() / 2000));
    fig1.push_back(trace(comparison->records,
                         mode_name(comparison->mode) + " |error|",
                         [](const RunRecord& r) { return r.v_err.norm(); },
                         cs));
  }
  write_line_chart(dir + "/fig_vtilde.svg",
                   {"Velocity tracking error", "t [s]", "ft/s, rad/s"}, fig1);

  write_line_chart(
      dir + "/fig_lambda.svg", {"Decision factor", "t [s]", "lambda"},
      {trace(rec, "lambda", [](const RunRecord& r) { return r.lambda; }, stride),
       trace(rec, "lambda_opt",
             [](const RunRecord& r) { return r.lambda_opt; }, stride),
       trace(rec, "lambda_sel",
             [](const RunRecord& r) { return r.lambda_sel; }, stride),
       trace(rec, "converged",
             [](const RunRecord& r) { return r.converged; }, stride)});

  std::vector<Series> fig3;
  for (int i = 0; i < 4; ++i) {
    fig3.push_back(trace(
        rec, kAct[i], [i](const RunRecord& r) { return r.delta[i]; }, stride));
  }
  write_line_chart(dir + "/fig_delta.svg",
                   {"Actuator deflections", "t [s]", "rad / unit"}, fig3);

  write_line_chart(
      dir + "/fig_estimation.svg",
      {"Estimation errors", "t [s]", "ft/s, lbf, slug"},
      {trace(rec, "|v_hat - v|",
             [](const RunRecord& r) { return (r.v_hat - r.v).norm(); }, stride),
       trace(rec, "|tau_hat - tau|",
             [](const RunRecord& r) {
               return (r.tau_hat - r.tau_true).norm();
             },
             stride),
       trace(rec, "m_hat", [](const RunRecord& r) { return r.p_hat[0]; },
             stride),
       trace(rec, "Iyy_hat", [](const RunRecord& r) { return r.p_hat[2]; },
             stride)});

  auto log10_of = [](double v) {
    return v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
  };
  write_line_chart(
      dir + "/fig_observability.svg",
      {"Observability matrix singular values", "t [s]", "log10 sigma"},
      {sparse_trace(rec, "largest",
                    [&](const RunRecord& r) { return log10_of(r.obs_sv_max); }),
       sparse_trace(rec, "median",
                    [&](const RunRecord& r) { return log10_of(r.obs_sv_med); }),
       sparse_trace(rec, "smallest",
                    [&](const RunRecord& r) { return log10_of(r.obs_sv_min); })});

  write_line_chart(
      dir + "/fig_residuals.svg",
      {"Koopman vs recursive residuals", "t [s]", "rms"},
      {sparse_trace(rec, "batch window fit",
                    [](const RunRecord& r) {
                      return r.fit_now > 0 ? r.koop_resid
                                           : std::numeric_limits<double>::quiet_NaN();
                    }),
       sparse_trace(rec, "recursive on same window",
                    [](const RunRecord& r) {
                      return r.fit_now > 0 ? r.rls_win_resid
                                           : std::numeric_limits<double>::quiet_NaN();
                    })});

  write_line_chart(
      dir + "/fig_extra_term.svg",
      {"Unmodeled yaw term", "t [s]", "lbf ft"},
      {trace(rec, "regression residual",
             [](const RunRecord& r) { return r.extra_resid[5]; }, stride),
       trace(rec, "injected", [](const RunRecord& r) { return r.extra_true; },
             stride)});
}

}  // namespace dac
