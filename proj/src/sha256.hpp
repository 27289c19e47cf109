#pragma once

#include <string>
#include <string_view>

namespace pseudodice::detail {

/// Lower-case hex SHA-256 of the bytes in `data`.
std::string sha256_hex(std::string_view data);

}  // namespace pseudodice::detail
