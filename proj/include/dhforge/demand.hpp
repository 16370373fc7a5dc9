#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace dhforge {

struct BuildingRecord;

inline constexpr std::size_t kHoursPerYear = 8760;
inline constexpr std::size_t kDaysPerYear = 365;

/// Hourly ambient temperatures (°C) for one 8760-hour year.
class WeatherSeries {
 public:
  explicit WeatherSeries(std::vector<double> temps);

  const std::vector<double>& temps() const { return temps_; }
  /// Arithmetic mean of the 24 hourly values of day d.
  double daily_mean(std::size_t day) const;

 private:
  std::vector<double> temps_;
};

/// Sigmoid standard-load-profile parameters for one usage type.
///
/// Daily factor h(θ) = a / (1 + (b / (θ - theta0))^c) + d, multiplied by a
/// weekday factor (index 0 = Monday). The day's energy is spread over the
/// hours by the hour factors of the temperature band the daily mean falls in;
/// band i covers [band_edges[i-1], band_edges[i]).
struct SlpParams {
  double a = 3.0;
  double b = -37.0;
  double c = 6.0;
  double d = 0.1;
  double theta0 = 40.0;
  std::array<double, 7> weekday{1, 1, 1, 1, 1, 1, 1};
  std::vector<double> band_edges;
  std::vector<std::array<double, 24>> hour_factors;

  /// Throws std::invalid_argument on non-positive factors, a malformed band
  /// table, or h(θ) <= 0 somewhere in [-20, 40] °C.
  void validate() const;
  std::size_t band_of(double theta_day) const;
};

using SpecificDemandTable = std::map<std::string, double>;  // usage -> kWh/(m²·a)
using SlpTable = std::map<std::string, SlpParams>;          // usage -> params

SpecificDemandTable default_specific_demand();
SlpTable default_slp_params();

/// Annual demand passes through; otherwise floor area × specific demand of
/// the usage type. Throws InputError naming the building when neither is
/// available.
double complete_annual_demand(const BuildingRecord& b, const SpecificDemandTable& specific);

double sigmoid_h(double theta_day, const SlpParams& p);

struct DemandProfile {
  int year = 0;
  std::vector<double> values;  // kWh per hour

  double total() const;
};

/// Hourly values h(θ_day)·weekday·hour_factor/Σhour_factors before scaling
/// to the annual demand.
std::vector<double> unscaled_profile(const WeatherSeries& weather, const SlpParams& p, int calendar_year);

/// unscaled_profile times the single constant that makes the sum equal annual.
DemandProfile build_profile(double annual, const WeatherSeries& weather, const SlpParams& p,
                            int calendar_year);

/// Peak hourly value; kWh over one hour equals kW.
double nominal_load(const DemandProfile& profile);

/// Normalized (unit-sum) profile shapes per usage type for one weather year.
/// The profile of any annual-demand mix is the weighted sum of shapes.
class ProfileBank {
 public:
  ProfileBank(const WeatherSeries& weather, const SlpTable& params, int calendar_year);

  const std::vector<double>& shape(const std::string& usage) const;
  DemandProfile profile(const std::map<std::string, double>& mix) const;
  double peak(const std::map<std::string, double>& mix) const;
  int year() const { return year_; }

 private:
  int year_;
  std::map<std::string, std::vector<double>> shapes_;
};

}  // namespace dhforge
