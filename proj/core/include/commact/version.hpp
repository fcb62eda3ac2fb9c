#ifndef COMMACT_VERSION_HPP
#define COMMACT_VERSION_HPP

namespace commact {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace commact

#endif  // COMMACT_VERSION_HPP
