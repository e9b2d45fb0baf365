#pragma once

#include <filesystem>
#include <iosfwd>

#include "elab/electorate.hpp"

namespace elab {

// Cast-vote-record CSV:
//
//   voter_id,m1,...,mN,<race_id>,...
//   0,0,1,...,NA,D,A,...
//
// Measures are 0, 1 or NA; choices are D, R, O, A or NA. Comma-separated,
// every line newline-terminated, UTF-8. Writing a table read from a file in
// this form reproduces the file byte for byte.

/// Parses a CVR stream. Throws DataError carrying the 1-based line number.
CvrTable read_cvr(std::istream& in);
CvrTable read_cvr(const std::filesystem::path& path);

void write_cvr(std::ostream& out, const CvrTable& table);
void write_cvr(const std::filesystem::path& path, const CvrTable& table);

char vote_code(Vote vote);

}  // namespace elab
