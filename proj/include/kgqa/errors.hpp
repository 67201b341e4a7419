#pragma once

// Error taxonomy shared across the library.  Every failure a caller can
// meaningfully react to gets its own type; all derive from kgqa::Error so
// coarse handlers can still catch everything in one clause.

#include <stdexcept>
#include <string>

namespace kgqa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define KGQA_DEFINE_ERROR(Name)        \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// Input parsing / loading.
KGQA_DEFINE_ERROR(ParseError);
KGQA_DEFINE_ERROR(SchemaViolation);
KGQA_DEFINE_ERROR(DuplicateId);

// Lookups against an immutable graph.
KGQA_DEFINE_ERROR(UnknownEntity);
KGQA_DEFINE_ERROR(UnknownRelation);
KGQA_DEFINE_ERROR(UnknownType);
KGQA_DEFINE_ERROR(UnknownSurface);

// Plan execution.
KGQA_DEFINE_ERROR(UnboundHole);
KGQA_DEFINE_ERROR(AllBranchesEmpty);

// Synthesis.
KGQA_DEFINE_ERROR(NoViableBinding);
KGQA_DEFINE_ERROR(SelectorError);
KGQA_DEFINE_ERROR(QuotaUnreachable);

// Chat clients.
KGQA_DEFINE_ERROR(ClientError);
KGQA_DEFINE_ERROR(MalformedResponse);

// Aggregation / configuration.
KGQA_DEFINE_ERROR(EmptyInput);
KGQA_DEFINE_ERROR(ConfigError);

#undef KGQA_DEFINE_ERROR

}  // namespace kgqa
