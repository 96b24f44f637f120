#pragma once

#include <string>

namespace eegbg {

std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::string& path);

// RFC 3339 UTC timestamp. Honors SOURCE_DATE_EPOCH when set so that runs can
// be byte-reproducible.
std::string utc_timestamp();

// Writes via a temp file in the same directory plus rename, so readers never
// observe partial content.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace eegbg
