#ifndef ENTROGAME_CSVIO_HPP
#define ENTROGAME_CSVIO_HPP

#include <filesystem>
#include <string>

namespace entrogame {

// Shortest decimal form that round-trips a double; "inf" for +infinity.
std::string fmt_double(double v);

// "# entrogame-csv v1 kind=<kind> unit=nats" — the versioned schema line
// every CSV artifact starts with.
std::string csv_schema_line(const std::string& kind);

// Optional second header line carrying the generation timestamp. Kept on
// its own line so file bodies stay byte-comparable across reruns.
std::string csv_timestamp_line();

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace entrogame

#endif
