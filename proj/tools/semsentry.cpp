#include <cstdio>
int main() { std::puts("semsentry: placeholder"); return 0; }
