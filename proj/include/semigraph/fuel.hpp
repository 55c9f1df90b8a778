#pragma once

// Fuel budgets for semidecision procedures.
//
// One unit of fuel is one enumerator emission or one exact predicate
// evaluation. Searches spend fuel through Fuel::spend, which throws
// FuelExhausted; every public search catches it at its boundary and reports
// TIMEOUT, so no partial result escapes.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace semigraph {

struct FuelExhausted {
  std::string stage;
};

class Fuel {
public:
  explicit Fuel(std::uint64_t budget) : budget_(budget) {}

  void spend(std::uint64_t n = 1) {
    if (n > budget_ - used_ || budget_ == used_) {
      used_ = budget_;
      throw FuelExhausted{stage_};
    }
    used_ += n;
  }

  bool exhausted() const { return used_ >= budget_; }
  std::uint64_t used() const { return used_; }
  std::uint64_t remaining() const { return budget_ - used_; }
  std::uint64_t budget() const { return budget_; }

  /// Label reported when the budget runs out.
  void set_stage(std::string s) { stage_ = std::move(s); }
  const std::string& stage() const { return stage_; }

private:
  std::uint64_t budget_;
  std::uint64_t used_ = 0;
  std::string stage_;
};

/// Sets a stage label for the lifetime of the guard.
class StageLabel {
public:
  StageLabel(Fuel& f, std::string label) : fuel_(f), saved_(f.stage()) { f.set_stage(std::move(label)); }
  ~StageLabel() { fuel_.set_stage(saved_); }
  StageLabel(const StageLabel&) = delete;
  StageLabel& operator=(const StageLabel&) = delete;

private:
  Fuel& fuel_;
  std::string saved_;
};

struct Timeout {
  std::string stage;
};

/// Either a value or TIMEOUT.
template <class T>
class Outcome {
public:
  Outcome(T value) : v_(std::move(value)) {}
  Outcome(Timeout t) : v_(std::move(t)) {}

  bool ok() const { return v_.index() == 0; }
  bool timed_out() const { return !ok(); }
  explicit operator bool() const { return ok(); }

  T& value() {
    if (!ok()) throw std::logic_error("Outcome: TIMEOUT at " + std::get<1>(v_).stage);
    return std::get<0>(v_);
  }
  const T& value() const {
    if (!ok()) throw std::logic_error("Outcome: TIMEOUT at " + std::get<1>(v_).stage);
    return std::get<0>(v_);
  }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }
  T& operator*() { return value(); }
  const T& operator*() const { return value(); }

  const std::string& stage() const { return std::get<1>(v_).stage; }

private:
  std::variant<T, Timeout> v_;
};

enum class Semi { Yes, Timeout };

inline const char* to_string(Semi s) { return s == Semi::Yes ? "YES" : "TIMEOUT"; }

namespace detail {
template <class T>
struct outcome_of {
  using type = Outcome<T>;
};
template <class T>
struct outcome_of<Outcome<T>> {
  using type = Outcome<T>;
};
}  // namespace detail

/// Runs body(fuel); a FuelExhausted escaping it becomes TIMEOUT. A body that
/// already returns an Outcome is passed through.
template <class F>
auto run_with_fuel(Fuel& fuel, F&& body) -> typename detail::outcome_of<decltype(body(fuel))>::type {
  try {
    return body(fuel);
  } catch (const FuelExhausted& e) {
    return Timeout{e.stage};
  }
}

}  // namespace semigraph
