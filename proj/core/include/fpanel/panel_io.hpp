#ifndef FPANEL_PANEL_IO_HPP
#define FPANEL_PANEL_IO_HPP

#include <iosfwd>
#include <string>

#include "fpanel/panel.hpp"

namespace fpanel {

// CSV exchange format for panels. Long layout, one sample per row:
//
//   series_id,replicate_index,grid_point,value
//
// Every series must contain the same replicate indices and every replicate
// the same grid points; violations raise StructuralError with the series
// and replicate named in the message. Grid points that stray outside
// [0, 1] are affinely rescaled onto [0, 1] (relative spacing preserved);
// grids already inside are left untouched so that emit/ingest round-trips
// are bitwise faithful. Values are written with shortest round-trip
// formatting for the same reason.
FunctionalPanel read_panel_csv(std::istream& in);
FunctionalPanel load_panel_csv(const std::string& path);

void write_panel_csv(const FunctionalPanel& panel, std::ostream& out);
void save_panel_csv(const FunctionalPanel& panel, const std::string& path);

} // namespace fpanel

#endif
