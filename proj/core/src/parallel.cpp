#include "metadesign/parallel.hpp"

namespace metadesign {

namespace {
std::atomic<unsigned> g_threads{0};
}

unsigned worker_threads() {
    const unsigned n = g_threads.load();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void set_worker_threads(unsigned n) { g_threads.store(n); }

}  // namespace metadesign
