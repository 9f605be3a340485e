#pragma once

#include "reflex/core/error.hpp"

namespace reflex {

template <typename T>
T decode(const Json& j) {
    try {
        return j.get<T>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON: ") + e.what());
    }
}

} // namespace reflex
