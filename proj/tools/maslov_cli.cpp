#include <cstdio>

int main() {
    std::puts("maslov_cli: not yet wired");
    return 2;
}
