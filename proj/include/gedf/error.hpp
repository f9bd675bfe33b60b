// SPDX-License-Identifier: Apache-2.0
/**
 * @file   error.hpp
 * @brief  Exception hierarchy shared by every gedf module.
 *
 * All errors derive from gedf::Error so callers (the CLI in particular) can
 * catch one type, print what() and exit nonzero.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace gedf {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string &message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string &kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define GEDF_DEFINE_ERROR(Name, label)                                   \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string &message) : Error(label, message) {} \
  }

GEDF_DEFINE_ERROR(ConfigError, "configuration error");
GEDF_DEFINE_ERROR(ShapeError, "shape error");
GEDF_DEFINE_ERROR(InputTooShortError, "input too short");
GEDF_DEFINE_ERROR(EmptyInputError, "empty input");
GEDF_DEFINE_ERROR(PoolingError, "pooling error");
GEDF_DEFINE_ERROR(ContractError, "contract violation");
GEDF_DEFINE_ERROR(CheckpointError, "checkpoint error");
GEDF_DEFINE_ERROR(IoError, "I/O error");
GEDF_DEFINE_ERROR(DivergedError, "training diverged");
GEDF_DEFINE_ERROR(InsufficientDataError, "insufficient data");
GEDF_DEFINE_ERROR(ProtocolError, "protocol error");
GEDF_DEFINE_ERROR(AlignmentError, "alignment error");
GEDF_DEFINE_ERROR(UsageError, "usage error");

#undef GEDF_DEFINE_ERROR

}  // namespace gedf
