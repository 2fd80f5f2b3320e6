#include "ngdc/parallel.hpp"

#include <omp.h>

namespace ngdc {

namespace {
int g_default_threads = 0;
}

void set_worker_count(int n) {
    if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
    omp_set_num_threads(n > 0 ? n : g_default_threads);
}

int worker_count() { return omp_get_max_threads(); }

}  // namespace ngdc
