#pragma once

#include <stdexcept>
#include <string>

namespace stackrl {

// Base of every error raised by the library. Subclasses name the failure
// kind so callers (and the CLI) can map them to exit codes or messages.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define STACKRL_DEFINE_ERROR(Name)                 \
    class Name : public Error {                    \
    public:                                        \
        explicit Name(const std::string& what)     \
            : Error(std::string(#Name ": ") + what) {} \
    }

STACKRL_DEFINE_ERROR(InvalidArgument);
STACKRL_DEFINE_ERROR(DimensionMismatch);
STACKRL_DEFINE_ERROR(OutOfBounds);
STACKRL_DEFINE_ERROR(OverlapError);
STACKRL_DEFINE_ERROR(SceneTooLarge);
STACKRL_DEFINE_ERROR(BadDimensions);
STACKRL_DEFINE_ERROR(FloatingBlock);
STACKRL_DEFINE_ERROR(PreconditionError);
STACKRL_DEFINE_ERROR(GenerationFailed);
STACKRL_DEFINE_ERROR(EmptyDataset);
STACKRL_DEFINE_ERROR(EmptyScene);
STACKRL_DEFINE_ERROR(EmptyGoal);
STACKRL_DEFINE_ERROR(MissingGroup);
STACKRL_DEFINE_ERROR(BadSpec);
STACKRL_DEFINE_ERROR(ShapeMismatch);
STACKRL_DEFINE_ERROR(ParseError);
STACKRL_DEFINE_ERROR(VersionMismatch);
STACKRL_DEFINE_ERROR(SteppedTerminalEpisode);
STACKRL_DEFINE_ERROR(UndecomposableGoal);
STACKRL_DEFINE_ERROR(IoError);

#undef STACKRL_DEFINE_ERROR

}  // namespace stackrl
