#include "rbto/presets.hpp"

#include "rbto/error.hpp"

namespace rbto {

BenchmarkCase make_mbb_half(int nx, int ny, double load, double allowable) {
    StructuredGrid grid(nx, ny);
    for (int j = 0; j <= ny; ++j) grid.fix_dof(grid.dof_x(0, j));
    grid.fix_dof(grid.dof_y(nx, 0));
    const int dof = grid.dof_y(0, ny);
    grid.add_load(dof, -load);
    return {std::move(grid), dof, allowable};
}

BenchmarkCase make_lbeam(int n, double load, double allowable) {
    RBTO_REQUIRE(n >= 4 && n % 4 == 0, ErrorCode::InvalidParameter,
                 "L-beam grid size must be a positive multiple of 4");
    StructuredGrid grid(n, n);
    const int half = n / 2;
    for (int ex = half; ex < n; ++ex)
        for (int ey = half; ey < n; ++ey) grid.set_passive(grid.element(ex, ey));
    for (int i = 0; i <= half; ++i) {
        grid.fix_dof(grid.dof_x(i, n));
        grid.fix_dof(grid.dof_y(i, n));
    }
    const int dof = grid.dof_y(n, half / 2);
    grid.add_load(dof, -load);
    return {std::move(grid), dof, allowable};
}

BenchmarkCase make_cantilever(int nx, int ny, double load, double allowable) {
    RBTO_REQUIRE(ny % 2 == 0, ErrorCode::InvalidParameter,
                 "cantilever needs an even element count in y");
    StructuredGrid grid(nx, ny);
    for (int j = 0; j <= ny; ++j) {
        grid.fix_dof(grid.dof_x(0, j));
        grid.fix_dof(grid.dof_y(0, j));
    }
    const int dof = grid.dof_y(nx, ny / 2);
    grid.add_load(dof, -load);
    return {std::move(grid), dof, allowable};
}

} // namespace rbto
