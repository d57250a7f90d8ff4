#pragma once

// Single include point for cpp-httplib so every translation unit sees the
// same configuration. Reachability probes follow at most 5 redirect hops.
#ifndef CPPHTTPLIB_REDIRECT_MAX_COUNT
#define CPPHTTPLIB_REDIRECT_MAX_COUNT 5
#endif

#include <httplib.h>
