#pragma once

#include <iosfwd>

namespace fibrelab {

/// Small invariant suite behind `fibrelab check`. One line per check on
/// `out`; true when all pass.
bool run_self_checks(std::ostream& out);

}  // namespace fibrelab
