#include "sleepsynth/evaluate.hpp"

#include <algorithm>
#include <cmath>

namespace sleepsynth {

namespace {

constexpr std::array<std::string_view, kAgeGroupCount> kAgeGroupLabels = {
    "15-24", "25-34", "35-44", "45-54", "55-64", "65-74", "75+"};

}  // namespace

std::string_view age_group_label(AgeGroup g) { return kAgeGroupLabels[static_cast<int>(g)]; }

AgeGroup age_group_of(int age) {
  if (age < 25) return AgeGroup::g15_24;
  if (age < 35) return AgeGroup::g25_34;
  if (age < 45) return AgeGroup::g35_44;
  if (age < 55) return AgeGroup::g45_54;
  if (age < 65) return AgeGroup::g55_64;
  if (age < 75) return AgeGroup::g65_74;
  return AgeGroup::g75_plus;
}

AgeGroup age_group_from_label(std::string_view label) {
  for (int i = 0; i < kAgeGroupCount; ++i)
    if (kAgeGroupLabels[i] == label) return static_cast<AgeGroup>(i);
  throw Error(errc::config_error, "unknown age group: " + std::string(label));
}

std::array<AgeGroup, kAgeGroupCount> all_age_groups() {
  std::array<AgeGroup, kAgeGroupCount> out{};
  for (int i = 0; i < kAgeGroupCount; ++i) out[i] = static_cast<AgeGroup>(i);
  return out;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(errc::empty_group, "quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(errc::config_error, "quantile level must be in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::array<double, kSleepBins> mean_sleep_per_hour(const FeatureMatrix& matrix) {
  if (matrix.rows.empty()) throw Error(errc::empty_input, "mean_sleep_per_hour on empty matrix");
  std::array<double, kSleepBins> means{};
  for (const auto& row : matrix.rows)
    for (int b = 0; b < kSleepBins; ++b) means[b] += row.sleep[b];
  for (double& m : means) m /= static_cast<double>(matrix.rows.size());
  return means;
}

namespace {

double fraction(const FeatureMatrix& m, auto&& pred) {
  std::size_t hits = 0;
  for (const auto& row : m.rows)
    if (pred(row)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(m.rows.size());
}

}  // namespace

std::vector<CovariateProb> covariate_probabilities(const FeatureMatrix& real,
                                                   const FeatureMatrix& synth) {
  if (real.rows.empty() || synth.rows.empty())
    throw Error(errc::empty_input, "covariate_probabilities needs non-empty matrices");

  std::vector<CovariateProb> out;
  auto emit = [&](std::string label, auto&& pred) {
    out.push_back({std::move(label), fraction(real, pred), fraction(synth, pred)});
  };

  for (int s = 0; s < kSexCount; ++s) {
    const Sex sex = static_cast<Sex>(s);
    emit("sex=" + std::string(sex_token(sex)),
         [sex](const FeatureRow& r) { return r.sex == sex; });
  }
  for (int d = 0; d < kDayCount; ++d) {
    const DayOfWeek day = static_cast<DayOfWeek>(d);
    emit("day_of_week=" + std::string(day_token(day)),
         [day](const FeatureRow& r) { return r.day_of_week == day; });
  }
  for (int m = 0; m < kMonthCount; ++m) {
    const Month month = static_cast<Month>(m);
    emit("month=" + std::string(month_token(month)),
         [month](const FeatureRow& r) { return r.month == month; });
  }
  for (AgeGroup g : all_age_groups()) {
    emit("age_group=" + std::string(age_group_label(g)),
         [g](const FeatureRow& r) { return age_group_of(r.age) == g; });
  }
  emit("weekday", [](const FeatureRow& r) { return is_weekday(r.day_of_week); });
  return out;
}

StratifiedGrid stratified_means(const FeatureMatrix& matrix) {
  if (matrix.rows.empty()) throw Error(errc::empty_input, "stratified_means on empty matrix");
  std::array<std::array<double, 7>, kAgeGroupCount> sums{};
  StratifiedGrid grid;
  for (const auto& row : matrix.rows) {
    const int g = static_cast<int>(age_group_of(row.age));
    const int d = static_cast<int>(row.day_of_week);
    sums[g][d] += total_sleep_minutes(row);
    ++grid.cells[g][d].n;
  }
  for (int g = 0; g < kAgeGroupCount; ++g)
    for (int d = 0; d < 7; ++d)
      if (grid.cells[g][d].n > 0) grid.cells[g][d].mean = sums[g][d] / grid.cells[g][d].n;
  return grid;
}

QuantileCurves quantile_curves(const FeatureMatrix& matrix, AgeGroup group,
                               std::span<const double> qs) {
  std::vector<const FeatureRow*> members;
  for (const auto& row : matrix.rows)
    if (age_group_of(row.age) == group) members.push_back(&row);
  if (members.empty())
    throw Error(errc::empty_group,
                "no rows in age group " + std::string(age_group_label(group)));

  QuantileCurves curves;
  curves.group = group;
  curves.qs.assign(qs.begin(), qs.end());
  std::vector<double> column(members.size());
  for (int b = 0; b < kSleepBins; ++b) {
    for (std::size_t i = 0; i < members.size(); ++i) column[i] = members[i]->sleep[b];
    curves.values[b].reserve(qs.size());
    for (double q : qs) curves.values[b].push_back(quantile(column, q));
  }
  return curves;
}

EvalReport build_report(const FeatureMatrix& real, const FeatureMatrix& synth,
                        std::span<const AgeGroup> groups_for_quantiles) {
  if (real.rows.empty() || synth.rows.empty())
    throw Error(errc::empty_input, "build_report needs non-empty matrices");

  static constexpr std::array<AgeGroup, 1> kDefaultGroups = {AgeGroup::g15_24};
  if (groups_for_quantiles.empty()) groups_for_quantiles = kDefaultGroups;

  EvalReport report;
  report.n_real = static_cast<int>(real.rows.size());
  report.n_synth = static_cast<int>(synth.rows.size());
  report.mean_real = mean_sleep_per_hour(real);
  report.mean_synth = mean_sleep_per_hour(synth);
  double abs_sum = 0.0;
  for (int b = 0; b < kSleepBins; ++b)
    abs_sum += std::fabs(report.mean_real[b] - report.mean_synth[b]);
  report.mean_abs_error = abs_sum / kSleepBins;

  report.covariates = covariate_probabilities(real, synth);
  for (const auto& cp : report.covariates)
    report.max_covariate_deviation =
        std::max(report.max_covariate_deviation, std::fabs(cp.p_real - cp.p_synth));

  report.grid_real = stratified_means(real);
  report.grid_synth = stratified_means(synth);

  for (AgeGroup g : groups_for_quantiles) {
    int n_real = 0, n_synth = 0;
    for (const auto& row : real.rows)
      if (age_group_of(row.age) == g) ++n_real;
    for (const auto& row : synth.rows)
      if (age_group_of(row.age) == g) ++n_synth;
    if (n_real == 0 || n_synth == 0) {
      report.skipped_groups.push_back(g);
      continue;
    }
    QuantileComparison cmp;
    cmp.group = g;
    cmp.n_real = n_real;
    cmp.n_synth = n_synth;
    cmp.real = quantile_curves(real, g, kDefaultQuantiles);
    cmp.synth = quantile_curves(synth, g, kDefaultQuantiles);
    for (int b = 0; b < kSleepBins; ++b) {
      cmp.iq_width_real[b] = cmp.real.values[b][2] - cmp.real.values[b][0];
      cmp.iq_width_synth[b] = cmp.synth.values[b][2] - cmp.synth.values[b][0];
    }
    report.quantiles.push_back(std::move(cmp));
  }
  return report;
}

namespace {

nlohmann::json grid_cells_json(const StratifiedGrid& real, const StratifiedGrid& synth) {
  nlohmann::json cells = nlohmann::json::array();
  for (AgeGroup g : all_age_groups()) {
    for (int d = 0; d < kDayCount; ++d) {
      const DayOfWeek day = static_cast<DayOfWeek>(d);
      const GridCell& cr = real.at(g, day);
      const GridCell& cs = synth.at(g, day);
      nlohmann::json cell{{"age_group", std::string(age_group_label(g))},
                          {"day", std::string(day_token(day))},
                          {"n_real", cr.n},
                          {"n_synth", cs.n}};
      cell["mean_real"] = cr.n > 0 ? nlohmann::json(cr.mean) : nlohmann::json(nullptr);
      cell["mean_synth"] = cs.n > 0 ? nlohmann::json(cs.mean) : nlohmann::json(nullptr);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string group_file_fragment(AgeGroup g) {
  std::string s(age_group_label(g));
  for (char& c : s)
    if (c == '+') c = 'p';
  return s;  // "75+" -> "75p"
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["n_real"] = report.n_real;
  j["n_synth"] = report.n_synth;

  const auto& names = feature_column_names();
  nlohmann::json bins = nlohmann::json::array();
  for (int b = 0; b < kSleepBins; ++b) bins.push_back(names[b]);
  j["mean_per_hour"] = {{"bins", bins},
                        {"real", report.mean_real},
                        {"synth", report.mean_synth}};
  j["mean_abs_error_minutes"] = report.mean_abs_error;

  nlohmann::json probs = nlohmann::json::array();
  for (const auto& cp : report.covariates)
    probs.push_back({{"label", cp.label}, {"p_real", cp.p_real}, {"p_synth", cp.p_synth}});
  j["covariate_probabilities"] = std::move(probs);
  j["max_covariate_deviation"] = report.max_covariate_deviation;

  j["stratified_means"] = grid_cells_json(report.grid_real, report.grid_synth);

  nlohmann::json quants = nlohmann::json::array();
  for (const auto& cmp : report.quantiles) {
    nlohmann::json real_rows = nlohmann::json::array();
    nlohmann::json synth_rows = nlohmann::json::array();
    for (int b = 0; b < kSleepBins; ++b) {
      real_rows.push_back(cmp.real.values[b]);
      synth_rows.push_back(cmp.synth.values[b]);
    }
    quants.push_back({{"group", std::string(age_group_label(cmp.group))},
                      {"n_real", cmp.n_real},
                      {"n_synth", cmp.n_synth},
                      {"qs", cmp.real.qs},
                      {"real", std::move(real_rows)},
                      {"synth", std::move(synth_rows)},
                      {"iq_width_real", cmp.iq_width_real},
                      {"iq_width_synth", cmp.iq_width_synth}});
  }
  j["quantiles"] = std::move(quants);

  nlohmann::json skipped = nlohmann::json::array();
  for (AgeGroup g : report.skipped_groups) skipped.push_back(std::string(age_group_label(g)));
  j["skipped_groups"] = std::move(skipped);
  return j;
}

void write_report_files(const EvalReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  write_file_atomic(out_dir / "report.json", report_to_json(report).dump(2) + "\n");

  const auto& names = feature_column_names();
  std::string fig2 = "bin,label,mean_real,mean_synth\n";
  for (int b = 0; b < kSleepBins; ++b) {
    fig2 += std::to_string(b + 1) + ',' + names[b] + ',' + format_double(report.mean_real[b]) +
            ',' + format_double(report.mean_synth[b]) + '\n';
  }
  write_file_atomic(out_dir / "fig2_means.csv", fig2);

  std::string fig3 = "label,p_real,p_synth\n";
  for (const auto& cp : report.covariates)
    fig3 += cp.label + ',' + format_double(cp.p_real) + ',' + format_double(cp.p_synth) + '\n';
  write_file_atomic(out_dir / "fig3_probs.csv", fig3);

  std::string fig4 = "age_group,day,n_real,mean_real,n_synth,mean_synth\n";
  for (AgeGroup g : all_age_groups()) {
    for (int d = 0; d < kDayCount; ++d) {
      const DayOfWeek day = static_cast<DayOfWeek>(d);
      const GridCell& cr = report.grid_real.at(g, day);
      const GridCell& cs = report.grid_synth.at(g, day);
      fig4 += std::string(age_group_label(g)) + ',' + std::string(day_token(day)) + ',' +
              std::to_string(cr.n) + ',' + (cr.n > 0 ? format_double(cr.mean) : "") + ',' +
              std::to_string(cs.n) + ',' + (cs.n > 0 ? format_double(cs.mean) : "") + '\n';
    }
  }
  write_file_atomic(out_dir / "fig4_grid.csv", fig4);

  for (const auto& cmp : report.quantiles) {
    std::string fig5 = "bin,label,q25_real,q50_real,q75_real,q25_synth,q50_synth,q75_synth\n";
    for (int b = 0; b < kSleepBins; ++b) {
      fig5 += std::to_string(b + 1) + ',' + names[b];
      for (int qi = 0; qi < 3; ++qi) fig5 += ',' + format_double(cmp.real.values[b][qi]);
      for (int qi = 0; qi < 3; ++qi) fig5 += ',' + format_double(cmp.synth.values[b][qi]);
      fig5 += '\n';
    }
    write_file_atomic(out_dir / ("fig5_quantiles_" + group_file_fragment(cmp.group) + ".csv"),
                      fig5);
  }
}

}  // namespace sleepsynth
