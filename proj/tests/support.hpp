// Helpers shared by the unit test binaries.
#pragma once

#include "downwash/error.hpp"

namespace testsupport {

inline bool throws_kind(downwash::ErrorKind kind, auto&& fn) {
    try {
        fn();
    } catch (const downwash::Error& e) {
        return e.kind() == kind;
    }
    return false;
}

}  // namespace testsupport
