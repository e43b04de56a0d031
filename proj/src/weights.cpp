#include "khardy/weights.hpp"
#include "khardy/errors.hpp"

#include <cmath>

namespace khardy {

WeightSequence WeightSequence::hardy() {
  return {Family::hardy, 0.0, {}, Extension::error_beyond_table};
}

WeightSequence WeightSequence::sobolev(int m) {
  if (m < 0) throw InvalidInput("sobolev weight: order must be >= 0");
  return {Family::sobolev, static_cast<double>(m), {},
          Extension::error_beyond_table};
}

WeightSequence WeightSequence::dirichlet() {
  return {Family::dirichlet, 0.0, {}, Extension::error_beyond_table};
}

WeightSequence WeightSequence::bergman() {
  return {Family::bergman, 0.0, {}, Extension::error_beyond_table};
}

WeightSequence WeightSequence::power(double m) {
  if (!std::isfinite(m)) throw InvalidInput("power weight: non-finite order");
  return {Family::power, m, {}, Extension::error_beyond_table};
}

WeightSequence WeightSequence::custom(std::vector<double> table,
                                      Extension ext) {
  if (table.empty()) throw InvalidInput("custom weight: empty table");
  for (double w : table)
    if (!(w > 0.0) || !std::isfinite(w))
      throw InvalidInput("custom weight: entries must be finite and > 0");
  return {Family::custom, 0.0, std::move(table), ext};
}

std::optional<double> WeightSequence::maybe(long s) const {
  if (s < 0) return std::nullopt;
  switch (family_) {
    case Family::hardy:
      return 1.0;
    case Family::sobolev: {
      const int m = static_cast<int>(order_);
      double acc = 1.0;
      const double s2 = static_cast<double>(s) * static_cast<double>(s);
      double p = 1.0;
      for (int j = 1; j <= m; ++j) {
        p *= s2;
        acc += p;
      }
      return acc;
    }
    case Family::dirichlet:
      if (s == 0) return std::nullopt;
      return static_cast<double>(s);
    case Family::bergman:
      return 1.0 / (1.0 + static_cast<double>(s));
    case Family::power:
      if (s == 0) {
        if (order_ == 0.0) return 1.0;
        return std::nullopt;
      }
      return std::pow(static_cast<double>(s), order_);
    case Family::custom: {
      const auto n = static_cast<long>(table_.size());
      if (s < n) return table_[static_cast<std::size_t>(s)];
      if (ext_ == Extension::repeat_last) return table_.back();
      return std::nullopt;
    }
  }
  return std::nullopt;
}

double WeightSequence::operator()(long s) const {
  if (auto w = maybe(s)) return *w;
  throw InvalidIndex("weight undefined at index " + std::to_string(s) +
                     " for " + description());
}

long WeightSequence::first_index() const {
  if (family_ == Family::dirichlet) return 1;
  if (family_ == Family::power && order_ != 0.0) return 1;
  return 0;
}

double WeightSequence::growth_degree() const {
  switch (family_) {
    case Family::sobolev:
      return 2.0 * order_;
    case Family::dirichlet:
      return 1.0;
    case Family::power:
      return order_ > 0.0 ? order_ : 0.0;
    default:
      return 0.0;
  }
}

std::string WeightSequence::description() const {
  switch (family_) {
    case Family::hardy:
      return "hardy";
    case Family::sobolev:
      return "sobolev(" + std::to_string(static_cast<int>(order_)) + ")";
    case Family::dirichlet:
      return "dirichlet";
    case Family::bergman:
      return "bergman";
    case Family::power: {
      std::string s = std::to_string(order_);
      return "power(" + s + ")";
    }
    case Family::custom:
      return "custom[" + std::to_string(table_.size()) + "]";
  }
  return "?";
}

}
