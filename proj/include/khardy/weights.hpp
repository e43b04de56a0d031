#pragma once

#include <optional>
#include <string>
#include <vector>

namespace khardy {

/*
 * Weight sequence omega_s defining a weighted Hardy norm
 * ||f||^2 = sum_s omega_s |f_s|^2.  Families:
 *
 *   hardy        omega_s = 1                          s >= 0
 *   sobolev(m)   omega_s = 1 + s^2 + ... + s^{2m}     s >= 0, integer m >= 0
 *   dirichlet    omega_s = s                          s >= 1  (semi-norm)
 *   bergman      omega_s = 1/(1+s)                    s >= 0
 *   power(m)     omega_s = s^m                        s >= 1, real m;
 *                omega_0 = 1 when m = 0, undefined otherwise
 *   custom       finite table, then either undefined or the last entry
 *                repeated, per the extension mode
 *
 * Indexes where the weight is undefined are reported through maybe();
 * operator() throws InvalidIndex there.  Callers that meet an undefined
 * weight against a nonzero coefficient raise IncompatibleWeight.
 */
class WeightSequence {
 public:
  enum class Family { hardy, sobolev, dirichlet, bergman, power, custom };
  enum class Extension { error_beyond_table, repeat_last };

  static WeightSequence hardy();
  static WeightSequence sobolev(int m);
  static WeightSequence dirichlet();
  static WeightSequence bergman();
  static WeightSequence power(double m);
  static WeightSequence custom(std::vector<double> table,
                               Extension ext = Extension::error_beyond_table);

  double operator()(long s) const;
  std::optional<double> maybe(long s) const;

  // Smallest index carrying a defined weight: 1 for dirichlet and for
  // power with m != 0, otherwise 0.
  long first_index() const;

  // Degree of polynomial growth of omega_s, used by convergence probes.
  // hardy/bergman/custom: 0; dirichlet: 1; sobolev(m): 2m;
  // power(m): max(m, 0).
  double growth_degree() const;

  Family family() const { return family_; }
  double order() const { return order_; }
  Extension extension() const { return ext_; }
  const std::vector<double>& table() const { return table_; }
  std::string description() const;

  bool operator==(const WeightSequence&) const = default;

 private:
  WeightSequence(Family f, double order, std::vector<double> table,
                 Extension ext)
      : family_(f), order_(order), table_(std::move(table)), ext_(ext) {}

  Family family_ = Family::hardy;
  double order_ = 0.0;
  std::vector<double> table_;
  Extension ext_ = Extension::error_beyond_table;
};

}
