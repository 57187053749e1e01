// Counts heap traffic around the DTW kernel. Standalone because it replaces
// the global allocation functions.
#include "loadclust/distance.hpp"

#include <cstdio>
#include <cstdlib>
#include <new>
#include <vector>

namespace {
std::size_t g_allocations = 0;
std::size_t g_bytes       = 0;
bool        g_counting    = false;
}  // namespace

void* operator new(std::size_t size) {
    if (g_counting) {
        ++g_allocations;
        g_bytes += size;
    }
    if (void* p = std::malloc(size ? size : 1)) return p;
    throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace {

int failures = 0;

void expect(bool ok, const char* what) {
    std::printf("%s: %s\n", ok ? "ok" : "FAILED", what);
    if (!ok) ++failures;
}

std::vector<double> ramp(std::size_t n, double phase) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>((i * 7 + 3) % 11) * 0.25 + phase;
    return v;
}

}  // namespace

int main() {
    const std::size_t m = 24;
    const auto        y = ramp(m, 0.5);

    loadclust::DtwWorkspace ws(m);
    volatile double         sink = 0.0;
    for (std::size_t n : {24u, 26u, 28u}) {
        const auto x  = ramp(n, 0.0);
        g_allocations = 0;
        g_bytes       = 0;
        g_counting    = true;
        for (int rep = 0; rep < 100; ++rep) sink = sink + loadclust::dtw(x, y, 8, ws);
        g_counting = false;
        expect(g_allocations == 0, "workspace kernel performs no heap allocation");
    }

    // Without a workspace: two rows of m + 1 doubles, regardless of the first length.
    std::size_t bytes_at_first = 0;
    for (std::size_t n : {20u, 24u, 28u}) {
        const auto x  = ramp(n, 0.0);
        g_allocations = 0;
        g_bytes       = 0;
        g_counting    = true;
        sink          = sink + loadclust::dtw(x, y, 8);
        g_counting    = false;
        expect(g_bytes <= 2 * (m + 1) * sizeof(double), "scratch bounded by two rows of the second length");
        if (n == 20) bytes_at_first = g_bytes;
        expect(g_bytes == bytes_at_first, "scratch does not grow with the first length");
    }

    std::printf("%s\n", failures ? "memory checks failed" : "memory checks passed");
    return failures ? 1 : 0;
}
