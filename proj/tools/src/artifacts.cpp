#include "rbto_cli/artifacts.hpp"

#include "rbto/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace rbto::cli {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

} // namespace

void write_density_csv(const std::filesystem::path& path, const StructuredGrid& grid, const Vector& physical) {
    RBTO_REQUIRE(physical.size() == grid.element_count(), ErrorCode::SizeMismatch,
                 "density vector does not match the grid");
    auto out = open_out(path);
    char buf[32];
    for (int row = 0; row < grid.ny(); ++row) {
        const int ey = grid.ny() - 1 - row;
        for (int ex = 0; ex < grid.nx(); ++ex) {
            std::snprintf(buf, sizeof buf, "%.6f", physical[grid.element(ex, ey)]);
            if (ex > 0) out << ',';
            out << buf;
        }
        out << '\n';
    }
    finish(out, path);
}

DensityField read_density_csv(const std::filesystem::path& path, const StructuredGrid& grid, double rho_min) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read density CSV " + path.string());
    DensityField field;
    field.rho_min = rho_min;
    field.physical = Vector::Zero(grid.element_count());
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        RBTO_REQUIRE(row < grid.ny(), ErrorCode::SizeMismatch,
                     path.string() + ": more than " + std::to_string(grid.ny()) + " rows");
        std::stringstream ss(line);
        std::string cell;
        int ex = 0;
        while (std::getline(ss, cell, ',')) {
            RBTO_REQUIRE(ex < grid.nx(), ErrorCode::SizeMismatch,
                         path.string() + ": row " + std::to_string(row + 1) + " has more than " +
                             std::to_string(grid.nx()) + " columns");
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            RBTO_REQUIRE(!cell.empty() && *end == '\0' && v >= 0.0 && v <= 1.0, ErrorCode::Io,
                         path.string() + ": bad density '" + cell + "' at row " + std::to_string(row + 1));
            field.physical[grid.element(ex, grid.ny() - 1 - row)] = v;
            ++ex;
        }
        RBTO_REQUIRE(ex == grid.nx(), ErrorCode::SizeMismatch,
                     path.string() + ": row " + std::to_string(row + 1) + " has " + std::to_string(ex) +
                         " columns, expected " + std::to_string(grid.nx()));
        ++row;
    }
    RBTO_REQUIRE(row == grid.ny(), ErrorCode::SizeMismatch,
                 path.string() + ": " + std::to_string(row) + " rows, expected " + std::to_string(grid.ny()));
    const auto& active = grid.active_elements();
    field.design.resize(static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i)
        field.design[static_cast<Eigen::Index>(i)] = std::max(field.physical[active[i]], rho_min);
    return field;
}

void write_pgm(const std::filesystem::path& path, const StructuredGrid& grid, const Vector& physical) {
    RBTO_REQUIRE(physical.size() == grid.element_count(), ErrorCode::SizeMismatch,
                 "density vector does not match the grid");
    auto out = open_out(path);
    out << "P2\n" << grid.nx() << ' ' << grid.ny() << "\n255\n";
    for (int row = 0; row < grid.ny(); ++row) {
        const int ey = grid.ny() - 1 - row;
        // plain PGM lines stay under 70 characters
        for (int ex = 0; ex < grid.nx(); ++ex) {
            const double rho = std::clamp(physical[grid.element(ex, ey)], 0.0, 1.0);
            const int px = static_cast<int>(std::lround(255.0 * (1.0 - rho)));
            out << px << ((ex + 1) % 16 == 0 || ex + 1 == grid.nx() ? '\n' : ' ');
        }
    }
    finish(out, path);
}

void write_cdf_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& cdf) {
    auto out = open_out(path);
    out << "displacement,empirical_cdf\n";
    char buf[64];
    for (const auto& [x, p] : cdf) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", x, p);
        out << buf;
    }
    finish(out, path);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
    auto out = open_out(path);
    out << value.dump(2) << '\n';
    finish(out, path);
}

} // namespace rbto::cli
