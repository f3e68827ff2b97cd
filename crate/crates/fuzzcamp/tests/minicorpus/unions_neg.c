static int reunion; /* union */
int main(void) { reunion = 2; return reunion; }
