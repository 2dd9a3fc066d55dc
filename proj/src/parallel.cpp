#include "lavlab/parallel.hpp"

#include <cstdlib>

namespace lavlab::par {

namespace {
int g_threads = -1;  // -1: not initialized, 0: auto

int read_env() {
    const char* e = std::getenv("LAVLAB_THREADS");
    if (!e || !*e) return 0;
    const long v = std::strtol(e, nullptr, 10);
    return v > 0 ? static_cast<int>(v) : 0;
}
}  // namespace

int max_threads() {
    if (g_threads < 0) g_threads = read_env();
    return g_threads;
}

void set_threads(int n) { g_threads = n >= 0 ? n : 0; }

}  // namespace lavlab::par
