#include "elab/cvr.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "elab/error.hpp"

namespace elab {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool is_measure_column(std::string_view name, std::size_t expected) {
    return name == "m" + std::to_string(expected);
}

bool looks_like_measure_column(std::string_view name) {
    if (name.size() < 2 || name[0] != 'm') return false;
    for (std::size_t i = 1; i < name.size(); ++i) {
        if (name[i] < '0' || name[i] > '9') return false;
    }
    return true;
}

Stance parse_stance(std::string_view field, std::size_t line) {
    if (field == "0") return Stance::Dem;
    if (field == "1") return Stance::Rep;
    if (field == "NA") return Stance::Missing;
    throw DataError("invalid measure value '" + std::string(field) + "'", line);
}

Vote parse_vote(std::string_view field, std::size_t line) {
    if (field == "D") return Vote::D;
    if (field == "R") return Vote::R;
    if (field == "O") return Vote::O;
    if (field == "A") return Vote::A;
    if (field == "NA") return Vote::Missing;
    throw DataError("invalid choice value '" + std::string(field) + "'", line);
}

void check_race_id(const std::string& id) {
    if (id.empty() || id == "voter_id" || looks_like_measure_column(id) ||
        id.find_first_of(",\r\n") != std::string::npos) {
        throw DataError("race id '" + id + "' cannot be written as a CVR column");
    }
}

}  // namespace

char vote_code(Vote vote) {
    switch (vote) {
        case Vote::D: return 'D';
        case Vote::R: return 'R';
        case Vote::O: return 'O';
        case Vote::A: return 'A';
        case Vote::Missing: return '?';
    }
    return '?';
}

CvrTable read_cvr(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw DataError("missing CVR header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_fields(line);
    if (header.empty() || header[0] != "voter_id") throw DataError("header must start with voter_id", 1);

    CvrTable table;
    std::size_t col = 1;
    while (col < header.size() && is_measure_column(header[col], col)) ++col;
    table.n_measures = col - 1;
    std::set<std::string, std::less<>> seen;
    for (; col < header.size(); ++col) {
        std::string id(header[col]);
        if (id.empty()) throw DataError("empty race id in header", 1);
        if (looks_like_measure_column(id)) throw DataError("measure column '" + id + "' out of order", 1);
        if (!seen.insert(id).second) throw DataError("duplicate race id '" + id + "'", 1);
        table.race_ids.push_back(std::move(id));
    }
    const std::size_t width = header.size();

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split_fields(line);
        if (fields.size() != width) {
            throw DataError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                            line_no);
        }
        BallotRecord rec;
        const auto id = fields[0];
        const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), rec.voter_id);
        if (ec != std::errc{} || ptr != id.data() + id.size() || id.empty()) {
            throw DataError("invalid voter_id '" + std::string(id) + "'", line_no);
        }
        rec.measures.reserve(table.n_measures);
        for (std::size_t m = 0; m < table.n_measures; ++m) rec.measures.push_back(parse_stance(fields[1 + m], line_no));
        rec.choices.reserve(table.race_ids.size());
        for (std::size_t j = 0; j < table.race_ids.size(); ++j) {
            rec.choices.push_back(parse_vote(fields[1 + table.n_measures + j], line_no));
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

CvrTable read_cvr(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CVR file '" + path.string() + "'");
    return read_cvr(in);
}

void write_cvr(std::ostream& out, const CvrTable& table) {
    table.validate();
    for (const auto& id : table.race_ids) check_race_id(id);

    std::string buf = "voter_id";
    for (std::size_t m = 1; m <= table.n_measures; ++m) buf += ",m" + std::to_string(m);
    for (const auto& id : table.race_ids) buf += "," + id;
    buf += '\n';
    out << buf;

    for (const auto& rec : table.records) {
        buf.clear();
        buf += std::to_string(rec.voter_id);
        for (Stance s : rec.measures) {
            buf += s == Stance::Dem ? ",0" : s == Stance::Rep ? ",1" : ",NA";
        }
        for (Vote v : rec.choices) {
            if (v == Vote::Missing) {
                buf += ",NA";
            } else {
                buf += ',';
                buf += vote_code(v);
            }
        }
        buf += '\n';
        out << buf;
    }
}

void write_cvr(const std::filesystem::path& path, const CvrTable& table) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write CVR file '" + path.string() + "'");
    write_cvr(out, table);
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace elab
