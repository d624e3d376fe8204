#pragma once

#include <doctest.h>

#include "chronos/error.hpp"

#define CHECK_ERRC(expr, errc)                                               \
  do {                                                                       \
    try {                                                                    \
      (void)(expr);                                                          \
      FAIL_CHECK("expected ", chronos::to_string(errc), " from " #expr);     \
    } catch (const chronos::Error& e_) {                                     \
      CHECK_MESSAGE(e_.code() == (errc), "got ", chronos::to_string(e_.code())); \
    }                                                                        \
  } while (false)
