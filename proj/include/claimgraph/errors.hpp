#pragma once

#include <stdexcept>
#include <string>

namespace claimgraph {

// Base of every error the library raises. Subclasses name the contract that
// was violated so callers (CLI, service) can map them to exit codes / HTTP
// statuses without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CLAIMGRAPH_ERROR(Name)                  \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

CLAIMGRAPH_ERROR(DimensionError);
CLAIMGRAPH_ERROR(DegenerateVectorError);
CLAIMGRAPH_ERROR(InvalidArgumentError);
CLAIMGRAPH_ERROR(ParseError);
CLAIMGRAPH_ERROR(EmptyCorpusError);
CLAIMGRAPH_ERROR(MissingVectorError);
CLAIMGRAPH_ERROR(RemoteTimeoutError);
CLAIMGRAPH_ERROR(RemoteProtocolError);
CLAIMGRAPH_ERROR(DegenerateLabelsError);
CLAIMGRAPH_ERROR(AlignmentError);
CLAIMGRAPH_ERROR(DuplicateClaimError);
CLAIMGRAPH_ERROR(UnknownClaimError);
CLAIMGRAPH_ERROR(UndefinedModularityError);
CLAIMGRAPH_ERROR(EmptyDatasetError);
CLAIMGRAPH_ERROR(MissingLabelError);
CLAIMGRAPH_ERROR(DuplicateArticleError);

#undef CLAIMGRAPH_ERROR

}  // namespace claimgraph
