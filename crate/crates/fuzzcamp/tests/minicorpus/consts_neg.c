/* const */
static int constant = 3;
int main(void) { return constant; }
