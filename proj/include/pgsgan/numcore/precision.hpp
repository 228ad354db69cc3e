#pragma once

// The numeric core and everything built on it is compiled once per scalar
// type. Each build lives in its own inline namespace so a float library and
// a double library can be linked into the same program.
#if defined(PGSGAN_REAL_DOUBLE)
#define PGSGAN_PRECISION f64
#else
#define PGSGAN_PRECISION f32
#endif

#define PGSGAN_NAMESPACE_BEGIN \
  namespace pgsgan {           \
  inline namespace PGSGAN_PRECISION {
#define PGSGAN_NAMESPACE_END \
  }                          \
  }

PGSGAN_NAMESPACE_BEGIN
#if defined(PGSGAN_REAL_DOUBLE)
using real = double;
#else
using real = float;
#endif
PGSGAN_NAMESPACE_END
