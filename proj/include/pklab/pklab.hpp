#pragma once

// Umbrella header: the full symbolic engine, spec language, catalog, and
// report serialization.

#include "pklab/acs.hpp"
#include "pklab/builtins.hpp"
#include "pklab/catalog.hpp"
#include "pklab/claims.hpp"
#include "pklab/deform.hpp"
#include "pklab/dsl.hpp"
#include "pklab/expr.hpp"
#include "pklab/form.hpp"
#include "pklab/frame.hpp"
#include "pklab/linalg.hpp"
#include "pklab/obstruct.hpp"
#include "pklab/pkahler.hpp"
#include "pklab/report.hpp"
#include "pklab/rootisolate.hpp"
