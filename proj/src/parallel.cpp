#include "rpz/parallel.hpp"

#include <omp.h>

namespace rpz {

namespace {
int g_workers = 0;
}

int workers() { return g_workers > 0 ? g_workers : omp_get_max_threads(); }

void set_workers(int count) { g_workers = count > 0 ? count : 0; }

}  // namespace rpz
