#ifndef BITEXT_IO_HPP
#define BITEXT_IO_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace bitext {

// Writes through a temporary file in the same directory, then renames over
// `path`, so readers never observe a partial file.
void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& writer);

// Shortest decimal form that round-trips a double (printf %.17g, trimmed).
std::string format_g17(double v);

// Splits on single tab characters; empty fields preserved.
std::vector<std::string> split_tabs(const std::string& line);

}  // namespace bitext

#endif  // BITEXT_IO_HPP
