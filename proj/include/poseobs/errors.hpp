#pragma once

#include <stdexcept>
#include <string>

namespace poseobs {

struct NotSkew : std::runtime_error {
  explicit NotSkew(const std::string& what) : std::runtime_error(what) {}
};

struct NotSymmetric : std::runtime_error {
  explicit NotSymmetric(const std::string& what) : std::runtime_error(what) {}
};

struct SingularBlock : std::runtime_error {
  explicit SingularBlock(const std::string& what) : std::runtime_error(what) {}
};

struct RankDeficient : std::runtime_error {
  explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

struct BaseGainsInfeasible : std::runtime_error {
  explicit BaseGainsInfeasible(const std::string& what) : std::runtime_error(what) {}
};

/// Riccati solution lost positive definiteness (step too large or corrupted input).
struct LostPositivity : std::runtime_error {
  explicit LostPositivity(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigInvalid : std::runtime_error {
  explicit ConfigInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyLog : std::runtime_error {
  explicit EmptyLog(const std::string& what) : std::runtime_error(what) {}
};

struct NonMonotoneTime : std::runtime_error {
  explicit NonMonotoneTime(const std::string& what) : std::runtime_error(what) {}
};

struct GapTooLarge : std::runtime_error {
  explicit GapTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct BadLogRow : std::runtime_error {
  explicit BadLogRow(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace poseobs
