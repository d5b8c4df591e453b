#include "an2n/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace an2n {

namespace {

namespace fs = std::filesystem;

std::string arm_name(const MetricsRecord& r) {
  return r.an2n ? r.algo + "+an2n" : r.algo;
}

struct RunSeries {
  std::vector<long> steps;
  std::vector<double> values;
};

// (env, arm) -> seed -> series, with all consistency checks applied.
using Grouped = std::map<std::pair<std::string, std::string>,
                         std::map<std::uint64_t, RunSeries>>;

Grouped group_records(const std::vector<MetricsRecord>& records) {
  require(!records.empty(), "report: no metrics records");
  Grouped grouped;
  for (const auto& r : records) {
    auto& series = grouped[{r.env, arm_name(r)}][r.seed];
    series.steps.push_back(r.step);
    series.values.push_back(r.eval_return_mean);
  }

  // Same arm set in every environment.
  std::map<std::string, std::set<std::string>> arms_by_env;
  for (const auto& [key, _] : grouped) arms_by_env[key.first].insert(key.second);
  const auto& reference = arms_by_env.begin()->second;
  for (const auto& [env, arms] : arms_by_env) {
    if (arms != reference) {
      std::ostringstream msg;
      msg << "report: mismatched arms across environments:";
      for (const auto& [e, a] : arms_by_env) {
        msg << " " << e << "=[";
        for (const auto& arm : a) msg << arm << " ";
        msg << "]";
      }
      throw std::invalid_argument(msg.str());
    }
  }

  // Within an (env, arm), every seed must share one step grid, sorted and
  // without duplicates (a duplicate (env, arm, seed) input shows up here).
  for (auto& [key, by_seed] : grouped) {
    const std::vector<long>* reference_steps = nullptr;
    for (auto& [seed, series] : by_seed) {
      std::vector<std::size_t> order(series.steps.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return series.steps[a] < series.steps[b];
      });
      RunSeries sorted;
      for (std::size_t i : order) {
        sorted.steps.push_back(series.steps[i]);
        sorted.values.push_back(series.values[i]);
      }
      for (std::size_t i = 1; i < sorted.steps.size(); ++i)
        require(sorted.steps[i] != sorted.steps[i - 1],
                "report: duplicate records for " + key.first + "/" +
                    key.second + " seed " + std::to_string(seed));
      series = std::move(sorted);
      if (!reference_steps) {
        reference_steps = &series.steps;
      } else {
        require(series.steps == *reference_steps,
                "report: step grids differ across seeds for " + key.first +
                    "/" + key.second);
      }
    }
  }
  return grouped;
}

void mean_std(const std::vector<double>& xs, double& mean, double& stddev) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  stddev = std::sqrt(var / xs.size());
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss << v;
  return ss.str();
}

// ---- SVG learning curves ----

struct Curve {
  std::string label;
  std::vector<long> steps;
  std::vector<double> mean;
  std::vector<double> lo, hi;  // +-1 std band
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

void write_svg(const std::string& path, const std::string& title,
               const std::vector<Curve>& curves) {
  const double width = 640, height = 420;
  const double ml = 70, mr = 20, mt = 40, mb = 50;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;

  long xmin = std::numeric_limits<long>::max(), xmax = 0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& c : curves) {
    for (long s : c.steps) {
      xmin = std::min(xmin, s);
      xmax = std::max(xmax, s);
    }
    for (std::size_t i = 0; i < c.mean.size(); ++i) {
      ymin = std::min(ymin, c.lo[i]);
      ymax = std::max(ymax, c.hi[i]);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) {
    ymax += 1.0;
    ymin -= 1.0;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double step) {
    return ml + pw * (step - xmin) / static_cast<double>(xmax - xmin);
  };
  auto py = [&](double v) { return mt + ph * (1.0 - (v - ymin) / (ymax - ymin)); };

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("report: cannot open " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
     << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";

  // axes and ticks
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
     << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double step = xmin + (xmax - xmin) * i / 4.0;
    const double v = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << px(step) << "\" y=\"" << mt + ph + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << static_cast<long>(step) << "</text>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(v) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(v) << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << py(v) << "\" x2=\"" << ml + pw
       << "\" y2=\"" << py(v) << "\" stroke=\"#dddddd\"/>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\">environment steps</text>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const char* color = kPalette[ci % (sizeof kPalette / sizeof *kPalette)];
    // band polygon: hi forward, lo backward
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" "
          "stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < c.steps.size(); ++i)
      os << px(c.steps[i]) << "," << py(c.hi[i]) << " ";
    for (std::size_t i = c.steps.size(); i-- > 0;)
      os << px(c.steps[i]) << "," << py(c.lo[i]) << " ";
    os << "\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.steps.size(); ++i)
      os << px(c.steps[i]) << "," << py(c.mean[i]) << " ";
    os << "\"/>\n";
    // legend
    const double ly = mt + 14 + 16 * ci;
    os << "<line x1=\"" << ml + 10 << "\" y1=\"" << ly << "\" x2=\"" << ml + 34
       << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ml + 40 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << c.label
       << "</text>\n";
  }
  os << "</svg>\n";
  if (!os) throw std::runtime_error("report: write failed for " + path);
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records) {
  Grouped grouped = group_records(records);
  std::vector<SummaryRow> rows;
  for (const auto& [key, by_seed] : grouped) {
    std::vector<double> finals;
    for (const auto& [seed, series] : by_seed)
      finals.push_back(series.values.back());
    SummaryRow row;
    row.env = key.first;
    row.arm = key.second;
    row.seeds = static_cast<int>(finals.size());
    mean_std(finals, row.final_mean, row.final_std);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report(const std::vector<std::string>& inputs,
                  const std::string& out_dir) {
  require(!inputs.empty(), "report: need at least one input");
  std::vector<MetricsRecord> records;
  for (const auto& input : inputs) {
    if (fs::is_directory(input)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(input))
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      require(!files.empty(), "report: no .csv files under " + input);
      for (const auto& f : files) {
        auto part = read_metrics(f.string());
        records.insert(records.end(), part.begin(), part.end());
      }
    } else {
      auto part = read_metrics(input);
      records.insert(records.end(), part.begin(), part.end());
    }
  }

  const auto rows = summarize(records);
  fs::create_directories(out_dir);

  // Table-1 shape: one row per environment, one column per arm.
  std::set<std::string> arm_set, env_set;
  for (const auto& r : rows) {
    arm_set.insert(r.arm);
    env_set.insert(r.env);
  }
  const std::vector<std::string> arm_order = [&] {
    std::vector<std::string> preferred{"ddpg", "ddpg+an2n", "sac", "sac+an2n"};
    std::vector<std::string> out;
    for (const auto& a : preferred)
      if (arm_set.count(a)) out.push_back(a);
    for (const auto& a : arm_set)
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    return out;
  }();

  std::ofstream os(fs::path(out_dir) / "summary.csv", std::ios::binary);
  if (!os) throw std::runtime_error("report: cannot open summary.csv");
  os << "env";
  for (const auto& a : arm_order) os << ',' << a;
  os << "\n";
  for (const auto& env : env_set) {
    os << env;
    for (const auto& arm : arm_order) {
      const auto it =
          std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& r) {
            return r.env == env && r.arm == arm;
          });
      os << ',' << fmt(it->final_mean) << "+-" << fmt(it->final_std);
    }
    os << "\n";
  }
  os.close();

  Grouped grouped = group_records(records);
  for (const auto& env : env_set) {
    std::vector<Curve> curves;
    for (const auto& arm : arm_order) {
      const auto& by_seed = grouped.at({env, arm});
      Curve c;
      c.label = arm;
      c.steps = by_seed.begin()->second.steps;
      for (std::size_t i = 0; i < c.steps.size(); ++i) {
        std::vector<double> vals;
        for (const auto& [seed, series] : by_seed)
          vals.push_back(series.values[i]);
        double m, sd;
        mean_std(vals, m, sd);
        c.mean.push_back(m);
        c.lo.push_back(m - sd);
        c.hi.push_back(m + sd);
      }
      curves.push_back(std::move(c));
    }
    write_svg((fs::path(out_dir) / ("curves_" + env + ".svg")).string(),
              env + ": mean eval return vs step", curves);
  }
}

}  // namespace an2n
