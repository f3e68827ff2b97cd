#include <stdint.h>
int8_t tiny(void) { return 1; }
int main(void) { return tiny(); }
