#include "dhforge/demand.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dhforge/errors.hpp"
#include "dhforge/ingest.hpp"

namespace dhforge {

namespace {

// Pole guard: θ - θ0 never exceeds this before exponentiation.
constexpr double kMaxThetaOffset = -0.1;

std::array<double, 24> hour_shape(double morning, double evening, double night) {
  std::array<double, 24> f{};
  for (int h = 0; h < 24; ++h) {
    const double m = std::exp(-0.5 * std::pow((h - 7.0) / 1.5, 2));
    const double e = std::exp(-0.5 * std::pow((h - 19.0) / 2.0, 2));
    const double n = (h < 5 || h >= 23) ? 1.0 : 0.0;
    f[h] = 1.0 + morning * m + evening * e - night * n;
  }
  return f;
}

// Band edges at -15..25 °C in 5 K steps; warmer bands concentrate more
// of the day's energy in the morning and evening.
void default_bands(SlpParams& p, double peakiness) {
  p.band_edges = {-15, -10, -5, 0, 5, 10, 15, 20, 25};
  p.hour_factors.clear();
  for (std::size_t band = 0; band <= p.band_edges.size(); ++band) {
    const double w = peakiness * (0.3 + 0.1 * static_cast<double>(band));
    p.hour_factors.push_back(hour_shape(w, 0.8 * w, 0.25));
  }
}

int weekday_index(int calendar_year, std::size_t day) {
  using namespace std::chrono;
  const sys_days first{year{calendar_year} / January / 1};
  const weekday wd{first + days{static_cast<long>(day)}};
  return static_cast<int>(wd.iso_encoding()) - 1;  // Monday = 0
}

}  // namespace

WeatherSeries::WeatherSeries(std::vector<double> temps) : temps_(std::move(temps)) {
  if (temps_.size() != kHoursPerYear)
    throw std::invalid_argument("weather series needs exactly 8760 hourly values");
  for (double t : temps_)
    if (!(t >= -50.0 && t <= 60.0)) throw std::invalid_argument("weather temperature outside [-50, 60] °C");
}

double WeatherSeries::daily_mean(std::size_t day) const {
  if (day >= kDaysPerYear) throw std::out_of_range("day index beyond 365");
  const auto first = temps_.begin() + static_cast<long>(day * 24);
  return std::accumulate(first, first + 24, 0.0) / 24.0;
}

void SlpParams::validate() const {
  for (double f : weekday)
    if (!(f > 0.0)) throw std::invalid_argument("weekday factors must be positive");
  if (!std::is_sorted(band_edges.begin(), band_edges.end()) ||
      std::adjacent_find(band_edges.begin(), band_edges.end()) != band_edges.end())
    throw std::invalid_argument("band edges must be strictly increasing");
  if (hour_factors.size() != band_edges.size() + 1)
    throw std::invalid_argument("need one hour-factor row per temperature band");
  for (const auto& row : hour_factors)
    for (double f : row)
      if (!(f > 0.0)) throw std::invalid_argument("hour factors must be positive");
  for (double theta = -20.0; theta <= 40.0; theta += 0.5) {
    const double h = sigmoid_h(theta, *this);
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("sigmoid must stay positive on [-20, 40] °C");
  }
}

std::size_t SlpParams::band_of(double theta_day) const {
  return static_cast<std::size_t>(std::upper_bound(band_edges.begin(), band_edges.end(), theta_day) -
                                  band_edges.begin());
}

SpecificDemandTable default_specific_demand() {
  return {{"residential", 120.0}, {"office", 100.0}, {"commercial", 110.0},
          {"industrial", 140.0},  {"other", 110.0}};
}

SlpTable default_slp_params() {
  SlpTable table;
  auto make = [](double a, double b, double c, double d, std::array<double, 7> wd, double peak) {
    SlpParams p;
    p.a = a;
    p.b = b;
    p.c = c;
    p.d = d;
    p.theta0 = 40.0;
    p.weekday = wd;
    default_bands(p, peak);
    return p;
  };
  table["residential"] = make(3.0, -37.0, 6.0, 0.1, {1, 1, 1, 1, 1, 1.02, 1.03}, 1.0);
  table["office"] = make(2.8, -36.0, 7.0, 0.1, {1.1, 1.1, 1.1, 1.1, 1.05, 0.6, 0.5}, 1.6);
  table["commercial"] = make(2.9, -37.0, 6.5, 0.1, {1.05, 1.05, 1.05, 1.05, 1.05, 0.95, 0.6}, 1.3);
  table["industrial"] = make(2.0, -35.0, 4.5, 0.3, {1.1, 1.1, 1.1, 1.1, 1.05, 0.7, 0.6}, 0.8);
  table["other"] = make(2.7, -37.0, 6.0, 0.12, {1, 1, 1, 1, 1, 0.9, 0.85}, 1.0);
  return table;
}

double complete_annual_demand(const BuildingRecord& b, const SpecificDemandTable& specific) {
  if (b.annual_demand) return *b.annual_demand;
  if (!b.floor_area) throw InputError("building '" + b.id + "' has neither annual demand nor floor area");
  const std::string usage(to_string(b.usage));
  auto it = specific.find(usage);
  if (it == specific.end())
    throw InputError("no specific demand configured for usage '" + usage + "' (building '" + b.id + "')");
  return *b.floor_area * it->second;
}

double sigmoid_h(double theta_day, const SlpParams& p) {
  const double offset = std::min(theta_day - p.theta0, kMaxThetaOffset);
  return p.a / (1.0 + std::pow(p.b / offset, p.c)) + p.d;
}

double DemandProfile::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

std::vector<double> unscaled_profile(const WeatherSeries& weather, const SlpParams& p, int calendar_year) {
  std::vector<double> values(kHoursPerYear, 0.0);
  for (std::size_t day = 0; day < kDaysPerYear; ++day) {
    const double theta = weather.daily_mean(day);
    const double daily = sigmoid_h(theta, p) * p.weekday[weekday_index(calendar_year, day)];
    const auto& hours = p.hour_factors.at(p.band_of(theta));
    const double hour_sum = std::accumulate(hours.begin(), hours.end(), 0.0);
    for (std::size_t h = 0; h < 24; ++h) values[day * 24 + h] = daily * hours[h] / hour_sum;
  }
  return values;
}

DemandProfile build_profile(double annual, const WeatherSeries& weather, const SlpParams& p,
                            int calendar_year) {
  if (!(annual >= 0.0) || !std::isfinite(annual)) throw std::invalid_argument("annual demand must be >= 0");
  DemandProfile profile{calendar_year, std::vector<double>(kHoursPerYear, 0.0)};
  if (annual == 0.0) return profile;
  profile.values = unscaled_profile(weather, p, calendar_year);
  const double scale = annual / std::accumulate(profile.values.begin(), profile.values.end(), 0.0);
  for (double& v : profile.values) v *= scale;
  return profile;
}

double nominal_load(const DemandProfile& profile) {
  if (profile.values.empty()) throw std::invalid_argument("empty profile");
  return *std::max_element(profile.values.begin(), profile.values.end());
}

ProfileBank::ProfileBank(const WeatherSeries& weather, const SlpTable& params, int calendar_year)
    : year_(calendar_year) {
  for (const auto& [usage, p] : params) {
    p.validate();
    shapes_.emplace(usage, build_profile(1.0, weather, p, calendar_year).values);
  }
}

const std::vector<double>& ProfileBank::shape(const std::string& usage) const {
  auto it = shapes_.find(usage);
  if (it == shapes_.end()) throw InputError("no load profile parameters for usage '" + usage + "'");
  return it->second;
}

DemandProfile ProfileBank::profile(const std::map<std::string, double>& mix) const {
  DemandProfile out{year_, std::vector<double>(kHoursPerYear, 0.0)};
  for (const auto& [usage, annual] : mix) {
    const auto& s = shape(usage);
    for (std::size_t h = 0; h < kHoursPerYear; ++h) out.values[h] += annual * s[h];
  }
  return out;
}

double ProfileBank::peak(const std::map<std::string, double>& mix) const {
  return nominal_load(profile(mix));
}

}  // namespace dhforge
