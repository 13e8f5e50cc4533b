#include "recon/error.hpp"

namespace recon {

UnreconstructableChannel::UnreconstructableChannel(std::size_t channel)
    : Error("channel " + std::to_string(channel) + " has no observed samples"), channel_(channel) {}

ModelLoadError::ModelLoadError(Reason reason, const std::string& what)
    : Error(what), reason_(reason) {}

}  // namespace recon
