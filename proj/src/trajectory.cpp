#include "dsadmm/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsadmm {

namespace {

constexpr const char* kHeader =
    "iter,comm_rounds_cum,scalars_cum,objective,suboptimality,consensus_err,kkt_residual,wall_ms";

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::optional<double> parse_optional(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    return std::stod(cell);
}

}  // namespace

void CommLedger::record_round(std::uint64_t scalars) {
    if (per_iteration_.empty()) per_iteration_.emplace_back();
    rounds_total_ += 1;
    scalars_total_ += scalars;
    per_iteration_.back().rounds += 1;
    per_iteration_.back().scalars += scalars;
}

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Converged: return "converged";
        case RunStatus::MaxIterations: return "max_iterations";
        case RunStatus::Diverged: return "diverged";
    }
    return "unknown";
}

void write_trajectory_csv(std::ostream& out, const std::vector<IterateRecord>& records) {
    out << kHeader << '\n';
    for (const auto& r : records) {
        out << r.iter << ',' << r.comm_rounds_cum << ',' << r.scalars_cum << ','
            << format_double(r.objective) << ','
            << (r.suboptimality ? format_double(*r.suboptimality) : "") << ','
            << format_double(r.consensus_err) << ','
            << (r.kkt_residual ? format_double(*r.kkt_residual) : "") << ','
            << format_double(r.wall_ms) << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<IterateRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_trajectory_csv(out, records);
}

std::vector<IterateRecord> read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw std::runtime_error("trajectory csv: unexpected header");
    std::vector<IterateRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 8)
            throw std::runtime_error("trajectory csv: wrong column count on line " + std::to_string(line_no));
        IterateRecord r;
        r.iter = std::stoi(cells[0]);
        r.comm_rounds_cum = std::stoull(cells[1]);
        r.scalars_cum = std::stoull(cells[2]);
        r.objective = std::stod(cells[3]);
        r.suboptimality = parse_optional(cells[4]);
        r.consensus_err = std::stod(cells[5]);
        r.kkt_residual = parse_optional(cells[6]);
        r.wall_ms = std::stod(cells[7]);
        records.push_back(r);
    }
    return records;
}

std::vector<IterateRecord> read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_trajectory_csv(in);
}

std::optional<std::size_t> first_reaching(const std::vector<IterateRecord>& records, double target) {
    for (std::size_t k = 0; k < records.size(); ++k)
        if (records[k].suboptimality && *records[k].suboptimality <= target) return k;
    return std::nullopt;
}

}  // namespace dsadmm
