#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fabsel {

/// Broad error families. The CLI maps each to a distinct exit code.
enum class ErrorCategory { config, io, transport, data };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define FABSEL_DEFINE_ERROR(Name, Category)                                   \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(ErrorCategory::Category, #Name ": " + what) {} \
  };

// fabric-data
FABSEL_DEFINE_ERROR(EmptyStream, data)
FABSEL_DEFINE_ERROR(DuplicateFabricId, data)
FABSEL_DEFINE_ERROR(InvalidRecord, data)
FABSEL_DEFINE_ERROR(IOFailure, io)

// pairgen
FABSEL_DEFINE_ERROR(InsufficientVariation, data)
FABSEL_DEFINE_ERROR(InsufficientFabrics, data)

// comparator
FABSEL_DEFINE_ERROR(InvalidDistribution, data)
FABSEL_DEFINE_ERROR(TemplateError, config)
FABSEL_DEFINE_ERROR(TransportError, transport)
FABSEL_DEFINE_ERROR(EmptyExplanation, data)

// ranking / selection
FABSEL_DEFINE_ERROR(UnknownFabric, data)
FABSEL_DEFINE_ERROR(MissingRanking, data)
FABSEL_DEFINE_ERROR(MissingPrediction, data)
FABSEL_DEFINE_ERROR(InvalidScenario, data)

// metrics
FABSEL_DEFINE_ERROR(EmptyCounts, data)
FABSEL_DEFINE_ERROR(NoDecisions, data)
FABSEL_DEFINE_ERROR(InfiniteLoss, data)

FABSEL_DEFINE_ERROR(ConfigError, config)

#undef FABSEL_DEFINE_ERROR

/// Frame whose nearest pressure sample lies outside the alignment tolerance.
class UnalignedFrame : public Error {
 public:
  UnalignedFrame(long long frame_t_ms, long long gap_ms, long long tol_ms)
      : Error(ErrorCategory::data,
              "UnalignedFrame: frame at " + std::to_string(frame_t_ms) + " ms has nearest pressure gap " +
                  std::to_string(gap_ms) + " ms > tolerance " + std::to_string(tol_ms) + " ms"),
        frame_t_ms_(frame_t_ms),
        gap_ms_(gap_ms) {}
  long long frame_t_ms() const noexcept { return frame_t_ms_; }
  long long gap_ms() const noexcept { return gap_ms_; }

 private:
  long long frame_t_ms_;
  long long gap_ms_;
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(std::size_t line, const std::string& detail)
      : Error(ErrorCategory::data, "SchemaViolation at line " + std::to_string(line) + ": " + detail),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InsufficientPairs : public Error {
 public:
  InsufficientPairs(std::string property, std::size_t available, std::size_t needed)
      : Error(ErrorCategory::data, "InsufficientPairs: " + property + " has " + std::to_string(available) +
                                       " extreme pairs, " + std::to_string(needed) + " needed"),
        property_(std::move(property)) {}
  const std::string& property() const noexcept { return property_; }

 private:
  std::string property_;
};

class MalformedResponse : public Error {
 public:
  explicit MalformedResponse(std::string raw)
      : Error(ErrorCategory::data, "MalformedResponse: no ANSWER line in response"), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

}  // namespace fabsel
